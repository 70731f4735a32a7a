#include "icilab/txchain.hpp"

#include "icilab/fft.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numbers>

namespace icilab {

static_assert(std::endian::native == std::endian::little,
              "frame dump writer assumes a little-endian host");

ComplexBlock modulate_block(const CVec& d, const OfdmConfig& cfg) {
    const int K = cfg.carrier_count;
    if (static_cast<int>(d.size()) != K)
        throw shape_error("modulate_block: expected " + std::to_string(K) +
                          " symbols, got " + std::to_string(d.size()));

    const int nsamp = cfg.samples_per_block();
    CVec spectrum(nsamp, cplx{0.0, 0.0});
    for (int k = 0; k < K; ++k) spectrum[k] = d[k];
    dsp::fft_inplace(spectrum, /*inverse=*/true);  // unnormalized sum

    ComplexBlock block;
    block.samples = std::move(spectrum);
    block.t0 = 0.0;
    block.dt = 1.0 / cfg.sample_rate_hz;
    return block;
}

ComplexBlock add_guard_interval(const ComplexBlock& block, const OfdmConfig& cfg) {
    const int ng = cfg.guard_samples();
    const int n = static_cast<int>(block.samples.size());

    ComplexBlock out;
    out.samples.reserve(static_cast<std::size_t>(n) + ng);
    // Cyclic prefix from the periodic extension; guards longer than the
    // block wrap around (Table-I-style configs at small K).
    for (int i = 0; i < ng; ++i) {
        const int idx = ((i - ng) % n + n) % n;
        out.samples.push_back(block.samples[idx]);
    }
    out.samples.insert(out.samples.end(), block.samples.begin(),
                       block.samples.end());
    out.dt = block.dt;
    out.t0 = block.t0 - ng * block.dt;
    return out;
}

Frame build_frame(std::vector<CVec> block_symbols, const OfdmConfig& cfg) {
    Frame frame;
    frame.block_symbols = std::move(block_symbols);
    frame.baseband.reserve(static_cast<std::size_t>(cfg.samples_per_frame()));

    std::vector<ComplexBlock> guarded(frame.block_symbols.size());
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < frame.block_symbols.size(); ++b)
        guarded[b] = add_guard_interval(modulate_block(frame.block_symbols[b], cfg), cfg);

    for (const auto& g : guarded)
        frame.baseband.insert(frame.baseband.end(), g.samples.begin(),
                              g.samples.end());
    return frame;
}

RVec upconvert(const CVec& baseband, const OfdmConfig& cfg) {
    if (cfg.center_freq_hz + cfg.bandwidth_hz / 2.0 >= cfg.sample_rate_hz / 2.0)
        throw config_error("upconvert: f_c + B/2 >= f_s/2 violates Nyquist");

    const double f0 = cfg.lowest_carrier_hz();
    const double step = 2.0 * std::numbers::pi * f0 / cfg.sample_rate_hz;
    RVec out(baseband.size());
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < baseband.size(); ++n) {
        const cplx rot = std::polar(1.0, step * static_cast<double>(n));
        out[n] = (baseband[n] * rot).real();
    }
    return out;
}

CVec downconvert(const RVec& passband, const OfdmConfig& cfg) {
    const double f0 = cfg.lowest_carrier_hz();
    const double step = -2.0 * std::numbers::pi * f0 / cfg.sample_rate_hz;

    std::size_t padded = 1;
    while (padded < passband.size()) padded <<= 1;

    CVec work(padded, cplx{0.0, 0.0});
    for (std::size_t n = 0; n < passband.size(); ++n)
        work[n] = 2.0 * passband[n] * std::polar(1.0, step * static_cast<double>(n));

    // Brickwall low-pass at +-f_s/4 removes the image at -2 f_0.
    dsp::fft_inplace(work);
    const std::size_t cut = padded / 4;
    for (std::size_t m = 0; m < padded; ++m) {
        const std::size_t dist = std::min(m, padded - m);
        if (dist > cut) work[m] = cplx{0.0, 0.0};
    }
    dsp::fft_inplace(work, /*inverse=*/true);

    CVec out(passband.size());
    const double scale = 1.0 / static_cast<double>(padded);
    for (std::size_t n = 0; n < passband.size(); ++n) out[n] = work[n] * scale;
    return out;
}

namespace {

constexpr char kFrameMagic[8] = {'I', 'C', 'I', 'L', 'A', 'B', 'F', '1'};

template <typename T>
void put_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

void write_frame_dump(std::ostream& out, const CVec& baseband, const OfdmConfig& cfg) {
    out.write(kFrameMagic, sizeof(kFrameMagic));
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.carrier_count));
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.block_count));
    put_raw<double>(out, cfg.sample_rate_hz);
    put_raw<std::uint64_t>(out, 0);  // reserved
    for (const cplx& s : baseband) {
        put_raw<double>(out, s.real());
        put_raw<double>(out, s.imag());
    }
}

void write_frame_dump(const std::string& path, const CVec& baseband, const OfdmConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open frame dump for writing: " + path);
    write_frame_dump(out, baseband, cfg);
}

FrameDump read_frame_dump(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kFrameMagic, sizeof(magic)) != 0)
        throw framing_error("frame dump: bad magic");

    FrameDump dump;
    dump.carrier_count = get_raw<std::uint32_t>(in);
    dump.block_count = get_raw<std::uint32_t>(in);
    dump.sample_rate_hz = get_raw<double>(in);
    (void)get_raw<std::uint64_t>(in);

    while (true) {
        const double re = get_raw<double>(in);
        const double im = get_raw<double>(in);
        if (!in) break;
        dump.baseband.emplace_back(re, im);
    }
    return dump;
}

FrameDump read_frame_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open frame dump: " + path);
    return read_frame_dump(in);
}

}  // namespace icilab
