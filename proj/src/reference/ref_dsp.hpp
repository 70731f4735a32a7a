#pragma once

#include "icilab/demod_bank.hpp"
#include "icilab/types.hpp"

// Serial direct-summation reference implementations. These deliberately
// avoid the FFT path so the optimized kernels can be checked against an
// independent route; they are linked by the tests, the self-check command
// and the benchmark only.
namespace icilab::ref {

// O(K * Nsamp) per output: z_k = (1/Nsamp) sum_n v[n] e^{-j 2 pi k df n/f_s}.
CVec direct_conv_fft(const ComplexBlock& block, const OfdmConfig& cfg);

// Direct evaluation of the fractional bank (optionally of t v(t)).
DemodBank direct_fractional_bank(const ComplexBlock& block, int half_span,
                                 double fe_hz, const OfdmConfig& cfg,
                                 bool time_weighted = false);

// Direct per-segment sums.
DemodBank direct_partial_bank(const ComplexBlock& block, int segments,
                              const OfdmConfig& cfg);

// The I frequency-shifted outputs y_{k,i} at shifts (i/I) df, i = 0..I-1,
// returned as a K x I row-major matrix.
CVec direct_shifted_outputs(const ComplexBlock& block, int segments,
                            const OfdmConfig& cfg);

// O(K * Nsamp) direct modulation sum.
CVec direct_modulate(const CVec& d, const OfdmConfig& cfg);

// Integer-delay tap sum: out[n] = sum_l gain_l x[n - delay_l].
CVec delayed_tap_sum(const CVec& x,
                     const std::vector<std::pair<cplx, int>>& taps);

// Frequency of the strongest tone: coarse FFT bin then a direct-DTFT
// ternary refinement. Returns Hz in [0, f_s).
double measure_tone_hz(const CVec& x, double sample_rate_hz);

}  // namespace icilab::ref
