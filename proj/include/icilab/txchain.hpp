#pragma once

#include "icilab/types.hpp"

#include <iosfwd>
#include <string>

namespace icilab {

// One transmitted frame: per-block encoded symbols plus the concatenated
// guarded baseband stream.
struct Frame {
    std::vector<CVec> block_symbols;  // N vectors of length K (d_k)
    CVec baseband;                    // N * (Ng + Nsamp) samples
};

// samples[n] = sum_k d_k e^{j 2 pi k df n / f_s}, n = 0 .. K*(f_s/B)-1.
// Realized as a zero-padded inverse FFT.
ComplexBlock modulate_block(const CVec& d, const OfdmConfig& cfg);

// Prepends a cyclic prefix of ceil(T_g f_s) samples copied from the tail.
ComplexBlock add_guard_interval(const ComplexBlock& block, const OfdmConfig& cfg);

// Assemble N encoded blocks into the guarded baseband stream.
Frame build_frame(std::vector<CVec> block_symbols, const OfdmConfig& cfg);

// Real passband at f_s: x[n] = Re{ s_b[n] e^{j 2 pi f_0 n / f_s} } with the
// K carriers straddling f_c (f_0 = f_c - B/2 + df/2).
RVec upconvert(const CVec& baseband, const OfdmConfig& cfg);

// Inverse of upconvert for cross-validation: complex mix down by f_0 and
// brickwall low-pass (cutoff f_s/4), gain 2.
CVec downconvert(const RVec& passband, const OfdmConfig& cfg);

// Frame dump: 32-byte header (magic "ICILABF1", u32 K, u32 N, f64 f_s,
// u64 reserved), then interleaved little-endian f64 re/im pairs.
void write_frame_dump(std::ostream& out, const CVec& baseband, const OfdmConfig& cfg);
void write_frame_dump(const std::string& path, const CVec& baseband, const OfdmConfig& cfg);

struct FrameDump {
    std::uint32_t carrier_count = 0;
    std::uint32_t block_count = 0;
    double sample_rate_hz = 0.0;
    CVec baseband;
};
FrameDump read_frame_dump(std::istream& in);
FrameDump read_frame_dump(const std::string& path);

}  // namespace icilab
