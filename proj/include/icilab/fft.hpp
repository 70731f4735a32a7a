#pragma once

#include "icilab/types.hpp"

namespace icilab::dsp {

// In-place radix-2 transform, power-of-two length, unnormalized:
//   forward:  X[m] = sum_n x[n] e^{-j 2 pi m n / N}
//   inverse:  x[n] = sum_m X[m] e^{+j 2 pi m n / N}
// Twiddle tables are cached per size and shared across threads.
void fft_inplace(CVec& data, bool inverse = false);

CVec fft(const CVec& data, bool inverse = false);

bool is_power_of_two(std::size_t n);

}  // namespace icilab::dsp
