#pragma once

#include "icilab/types.hpp"

#include <span>

namespace icilab {

int bits_per_symbol(int psk_order);

// Constellation point for Gray index g: e^{j(2 pi g / Q + offset)},
// offset = pi/4 for QPSK, 0 otherwise.
cplx psk_point(int gray_index, int psk_order);

// Gray-mapped unit-modulus symbols. Bit groups are consumed MSB-first;
// the group value b maps to Gray index g = b ^ (b >> 1).
CVec map_bits_to_psk(std::span<const std::uint8_t> bits, int psk_order);

// d_0 = c, d_k = b_k d_{k-1}. Input holds b_1..b_{K-1}; output has length K.
CVec differential_encode(const CVec& b, cplx c);

// b_k = d_k / d_{k-1}, k = 1..K-1. Output has length K-1.
CVec differential_decode(const CVec& d);

// Nearest Q-PSK point per entry, ties broken toward the smaller phase
// angle in [0, 2 pi).
CVec slice_psk(const CVec& values, int psk_order);
cplx slice_psk_one(cplx value, int psk_order);

}  // namespace icilab
