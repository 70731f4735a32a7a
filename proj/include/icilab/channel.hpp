#pragma once

#include "icilab/types.hpp"

#include <span>

namespace icilab {

// Band-limited evaluation of x at fractional sample index pos. 2H-tap
// windowed sinc (min 4-term Blackman-Harris); samples outside [0, size)
// are zero. Exact integer positions return the stored sample.
cplx interp_at(std::span<const cplx> x, double pos, int half_taps = 32);

// Rate change by (1+factor): out[n] = x(n (1+factor)), length
// floor(len / (1+factor)). factor = 0 is a bit-exact pass-through.
CVec resample_doppler(const CVec& signal, double factor);

// Baseband-equivalent multipath propagation with uniform Doppler scaling:
//   out[n] = e^{j 2 pi f_0 a n/f_s} sum_l g_l e^{-j 2 pi f_0 tau_l}
//            e^{j phidot_l n/f_s} x((1+a) n/f_s - tau_l)
// Noise is NOT added here; see add_noise.
CVec apply_channel(const CVec& frame_baseband, const ChannelSpec& spec,
                   const OfdmConfig& cfg);

// Cross-validation route: the same channel applied to the real passband
// waveform (analytic-signal gains, passband time scaling), then mixed down
// and brickwall-filtered. Must agree with apply_channel to <= -50 dB.
CVec apply_channel_passband(const CVec& frame_baseband, const ChannelSpec& spec,
                            const OfdmConfig& cfg);

// Circularly-symmetric complex Gaussian noise at variance
// mean(|signal|^2) / 10^(snr_db/10). snr_db = +inf returns the input.
CVec add_noise(const CVec& signal, double snr_db, std::uint64_t seed);

}  // namespace icilab
