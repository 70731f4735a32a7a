#pragma once

#include "icilab/types.hpp"

#include <span>

namespace icilab {

enum class BankKind { Conventional, Partial, Fractional, Adaptive, TimeWeighted };

// K x M matrix of demodulator outputs. For fractional kinds M = 2A+1 and
// column a+A holds the output at frequency shift a f_e/(A+1); for the
// partial kind M = I and column i holds the i-th time-segment output.
struct DemodBank {
    int carriers = 0;   // K
    int columns = 1;    // M
    int half_span = 0;  // A (fractional kinds only)
    double fe_hz = 0.0;
    BankKind kind = BankKind::Conventional;
    CVec values;  // row-major

    cplx at(int k, int col) const {
        return values[static_cast<std::size_t>(k) * columns + col];
    }
    // Fractional-shift access, a in [-A, A].
    cplx at_shift(int k, int a) const { return at(k, a + half_span); }
    std::span<const cplx> row(int k) const {
        return {values.data() + static_cast<std::size_t>(k) * columns,
                static_cast<std::size_t>(columns)};
    }
};

// Per-carrier combiner vectors, K x M row-major.
struct WeightSet {
    int carriers = 0;
    int taps = 0;
    CVec w;

    std::span<cplx> row(int k) {
        return {w.data() + static_cast<std::size_t>(k) * taps,
                static_cast<std::size_t>(taps)};
    }
    std::span<const cplx> row(int k) const {
        return {w.data() + static_cast<std::size_t>(k) * taps,
                static_cast<std::size_t>(taps)};
    }

    // Center tap 1: the initialization for fractional banks.
    static WeightSet impulse(int carriers, int taps);
    // All ones: the pass-through combiner for partial (segment-sum) banks.
    static WeightSet uniform(int carriers, int taps);
    static WeightSet initial_for(BankKind kind, int carriers, int taps);
};

// z_k = (1/Nsamp) sum_n v[n] e^{-j 2 pi k df n / f_s}, k = 0..K-1; a clean
// loopback returns d_k at unit scale.
CVec conv_fft(const ComplexBlock& block, const OfdmConfig& cfg);

// z_{k,a}: shift by a f_e/(A+1) then conv_fft, a = -A..A. Column a=0 is
// bit-identical to conv_fft.
DemodBank fractional_bank(const ComplexBlock& block, int half_span, double fe_hz,
                          const OfdmConfig& cfg);

// Same pipeline applied to t v(t), t measured from block start.
DemodBank time_weighted_bank(const ComplexBlock& block, int half_span,
                             double fe_hz, const OfdmConfig& cfg);

// y_{k,i}: conv_fft restricted to the i-th of I contiguous time slices
// (boundaries at round(i Nsamp / I)); columns sum to conv_fft.
DemodBank partial_bank(const ComplexBlock& block, int segments,
                       const OfdmConfig& cfg);

// x_k = w_k^H z_k.
CVec combine(const DemodBank& bank, const WeightSet& weights);

cplx dot_wh_z(std::span<const cplx> w, std::span<const cplx> z);

}  // namespace icilab
