#include "icilab/demod_bank.hpp"

#include "icilab/fft.hpp"

#include <numbers>

namespace icilab {

WeightSet WeightSet::impulse(int carriers, int taps) {
    WeightSet ws;
    ws.carriers = carriers;
    ws.taps = taps;
    ws.w.assign(static_cast<std::size_t>(carriers) * taps, cplx{0.0, 0.0});
    for (int k = 0; k < carriers; ++k) ws.row(k)[taps / 2] = cplx{1.0, 0.0};
    return ws;
}

WeightSet WeightSet::uniform(int carriers, int taps) {
    WeightSet ws;
    ws.carriers = carriers;
    ws.taps = taps;
    ws.w.assign(static_cast<std::size_t>(carriers) * taps, cplx{1.0, 0.0});
    return ws;
}

WeightSet WeightSet::initial_for(BankKind kind, int carriers, int taps) {
    return kind == BankKind::Partial ? uniform(carriers, taps)
                                     : impulse(carriers, taps);
}

namespace {

void check_block(const ComplexBlock& block, const OfdmConfig& cfg) {
    if (static_cast<int>(block.samples.size()) != cfg.samples_per_block())
        throw shape_error("block length " + std::to_string(block.samples.size()) +
                          " != K * f_s/B = " + std::to_string(cfg.samples_per_block()));
}

// First K bins of the full-length FFT, 1/Nsamp normalization. Since
// df/f_s = 1/Nsamp, FFT bin k is exactly the carrier-k correlation.
CVec low_bins(CVec work, int carriers) {
    const double scale = 1.0 / static_cast<double>(work.size());
    dsp::fft_inplace(work);
    CVec out(carriers);
    for (int k = 0; k < carriers; ++k) out[k] = work[k] * scale;
    return out;
}

// samples * e^{-j 2 pi shift_hz n / f_s}; rotation recurrence with periodic
// resync to hold phase error well under the 1e-9 oracle bound.
CVec shifted_copy(const CVec& samples, double shift_hz, double fs) {
    CVec out(samples.size());
    const double step = -2.0 * std::numbers::pi * shift_hz / fs;
    const cplx rot_step = std::polar(1.0, step);
    cplx rot{1.0, 0.0};
    for (std::size_t n = 0; n < samples.size(); ++n) {
        if ((n & 1023u) == 0)
            rot = std::polar(1.0, step * static_cast<double>(n));
        out[n] = samples[n] * rot;
        rot *= rot_step;
    }
    return out;
}

DemodBank build_fractional(const CVec& samples, int half_span, double fe_hz,
                           const OfdmConfig& cfg, BankKind kind) {
    const int a_span = half_span;
    const int m = 2 * a_span + 1;

    DemodBank bank;
    bank.carriers = cfg.carrier_count;
    bank.columns = m;
    bank.half_span = a_span;
    bank.fe_hz = fe_hz;
    bank.kind = kind;
    bank.values.resize(static_cast<std::size_t>(bank.carriers) * m);

    std::vector<CVec> cols(m);
#pragma omp parallel for schedule(static)
    for (int col = 0; col < m; ++col) {
        const int a = col - a_span;
        if (a == 0) {
            cols[col] = low_bins(samples, bank.carriers);
        } else {
            const double shift = fe_hz * a / static_cast<double>(a_span + 1);
            cols[col] = low_bins(shifted_copy(samples, shift, cfg.sample_rate_hz),
                                 bank.carriers);
        }
    }
    for (int k = 0; k < bank.carriers; ++k)
        for (int col = 0; col < m; ++col)
            bank.values[static_cast<std::size_t>(k) * m + col] = cols[col][k];
    return bank;
}

}  // namespace

CVec conv_fft(const ComplexBlock& block, const OfdmConfig& cfg) {
    check_block(block, cfg);
    return low_bins(block.samples, cfg.carrier_count);
}

DemodBank fractional_bank(const ComplexBlock& block, int half_span, double fe_hz,
                          const OfdmConfig& cfg) {
    check_block(block, cfg);
    if (half_span < 0) throw shape_error("fractional_bank: A must be >= 0");
    if (fe_hz <= 0) throw config_error("fractional_bank: f_e must be positive");
    const bool at_spacing = std::abs(fe_hz - cfg.carrier_spacing_hz()) <= 1e-12;
    return build_fractional(block.samples, half_span, fe_hz, cfg,
                            at_spacing ? BankKind::Fractional : BankKind::Adaptive);
}

DemodBank time_weighted_bank(const ComplexBlock& block, int half_span,
                             double fe_hz, const OfdmConfig& cfg) {
    check_block(block, cfg);
    if (half_span < 0) throw shape_error("time_weighted_bank: A must be >= 0");
    if (fe_hz <= 0) throw config_error("time_weighted_bank: f_e must be positive");

    CVec weighted(block.samples.size());
    const double dt = 1.0 / cfg.sample_rate_hz;
    for (std::size_t n = 0; n < weighted.size(); ++n)
        weighted[n] = block.samples[n] * (static_cast<double>(n) * dt);
    DemodBank bank = build_fractional(weighted, half_span, fe_hz, cfg,
                                      BankKind::TimeWeighted);
    return bank;
}

DemodBank partial_bank(const ComplexBlock& block, int segments,
                       const OfdmConfig& cfg) {
    check_block(block, cfg);
    if (segments < 1) throw shape_error("partial_bank: I must be >= 1");

    const int nsamp = cfg.samples_per_block();
    DemodBank bank;
    bank.carriers = cfg.carrier_count;
    bank.columns = segments;
    bank.kind = BankKind::Partial;
    bank.values.resize(static_cast<std::size_t>(bank.carriers) * segments);

    std::vector<CVec> cols(segments);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < segments; ++i) {
        const auto lo = static_cast<std::size_t>(
            std::llround(static_cast<double>(i) * nsamp / segments));
        const auto hi = static_cast<std::size_t>(
            std::llround(static_cast<double>(i + 1) * nsamp / segments));
        CVec sliced(block.samples.size(), cplx{0.0, 0.0});
        for (std::size_t n = lo; n < hi; ++n) sliced[n] = block.samples[n];
        cols[i] = low_bins(std::move(sliced), bank.carriers);
    }
    for (int k = 0; k < bank.carriers; ++k)
        for (int i = 0; i < segments; ++i)
            bank.values[static_cast<std::size_t>(k) * segments + i] = cols[i][k];
    return bank;
}

cplx dot_wh_z(std::span<const cplx> w, std::span<const cplx> z) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < w.size(); ++i) acc += std::conj(w[i]) * z[i];
    return acc;
}

CVec combine(const DemodBank& bank, const WeightSet& weights) {
    if (weights.carriers != bank.carriers || weights.taps != bank.columns)
        throw shape_error("combine: weight dimensions do not match bank");
    CVec x(bank.carriers);
    for (int k = 0; k < bank.carriers; ++k)
        x[k] = dot_wh_z(weights.row(k), bank.row(k));
    return x;
}

}  // namespace icilab
