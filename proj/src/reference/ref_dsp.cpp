#include "ref_dsp.hpp"

#include "icilab/fft.hpp"

#include <cmath>
#include <numbers>

namespace icilab::ref {

namespace {

// (1/N) sum_n u[n] e^{-j 2 pi f n / f_s}
cplx dtft_point(const CVec& u, double freq_hz, double fs) {
    const double step = -2.0 * std::numbers::pi * freq_hz / fs;
    cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < u.size(); ++n)
        acc += u[n] * std::polar(1.0, step * static_cast<double>(n));
    return acc / static_cast<double>(u.size());
}

}  // namespace

CVec direct_conv_fft(const ComplexBlock& block, const OfdmConfig& cfg) {
    const double df = cfg.carrier_spacing_hz();
    CVec out(cfg.carrier_count);
    for (int k = 0; k < cfg.carrier_count; ++k)
        out[k] = dtft_point(block.samples, k * df, cfg.sample_rate_hz);
    return out;
}

DemodBank direct_fractional_bank(const ComplexBlock& block, int half_span,
                                 double fe_hz, const OfdmConfig& cfg,
                                 bool time_weighted) {
    const int m = 2 * half_span + 1;
    const double df = cfg.carrier_spacing_hz();

    CVec input = block.samples;
    if (time_weighted) {
        const double dt = 1.0 / cfg.sample_rate_hz;
        for (std::size_t n = 0; n < input.size(); ++n)
            input[n] *= static_cast<double>(n) * dt;
    }

    DemodBank bank;
    bank.carriers = cfg.carrier_count;
    bank.columns = m;
    bank.half_span = half_span;
    bank.fe_hz = fe_hz;
    bank.kind = time_weighted ? BankKind::TimeWeighted : BankKind::Adaptive;
    bank.values.resize(static_cast<std::size_t>(bank.carriers) * m);
    for (int k = 0; k < bank.carriers; ++k)
        for (int a = -half_span; a <= half_span; ++a) {
            const double freq = k * df + fe_hz * a / (half_span + 1.0);
            bank.values[static_cast<std::size_t>(k) * m + (a + half_span)] =
                dtft_point(input, freq, cfg.sample_rate_hz);
        }
    return bank;
}

DemodBank direct_partial_bank(const ComplexBlock& block, int segments,
                              const OfdmConfig& cfg) {
    const int nsamp = cfg.samples_per_block();
    const double df = cfg.carrier_spacing_hz();
    const double step0 = -2.0 * std::numbers::pi * df / cfg.sample_rate_hz;

    DemodBank bank;
    bank.carriers = cfg.carrier_count;
    bank.columns = segments;
    bank.kind = BankKind::Partial;
    bank.values.resize(static_cast<std::size_t>(bank.carriers) * segments);
    for (int k = 0; k < bank.carriers; ++k) {
        for (int i = 0; i < segments; ++i) {
            const auto lo = static_cast<std::size_t>(
                std::llround(static_cast<double>(i) * nsamp / segments));
            const auto hi = static_cast<std::size_t>(
                std::llround(static_cast<double>(i + 1) * nsamp / segments));
            cplx acc{0.0, 0.0};
            for (std::size_t n = lo; n < hi; ++n)
                acc += block.samples[n] *
                       std::polar(1.0, step0 * k * static_cast<double>(n));
            bank.values[static_cast<std::size_t>(k) * segments + i] =
                acc / static_cast<double>(nsamp);
        }
    }
    return bank;
}

CVec direct_shifted_outputs(const ComplexBlock& block, int segments,
                            const OfdmConfig& cfg) {
    const double df = cfg.carrier_spacing_hz();
    CVec out(static_cast<std::size_t>(cfg.carrier_count) * segments);
    for (int k = 0; k < cfg.carrier_count; ++k)
        for (int i = 0; i < segments; ++i) {
            const double freq = (k + static_cast<double>(i) / segments) * df;
            out[static_cast<std::size_t>(k) * segments + i] =
                dtft_point(block.samples, freq, cfg.sample_rate_hz);
        }
    return out;
}

CVec direct_modulate(const CVec& d, const OfdmConfig& cfg) {
    const int nsamp = cfg.samples_per_block();
    const double df = cfg.carrier_spacing_hz();
    const double step = 2.0 * std::numbers::pi * df / cfg.sample_rate_hz;
    CVec out(nsamp, cplx{0.0, 0.0});
    for (int n = 0; n < nsamp; ++n)
        for (std::size_t k = 0; k < d.size(); ++k)
            out[n] += d[k] * std::polar(1.0, step * static_cast<double>(k) * n);
    return out;
}

CVec delayed_tap_sum(const CVec& x,
                     const std::vector<std::pair<cplx, int>>& taps) {
    CVec out(x.size(), cplx{0.0, 0.0});
    for (const auto& [gain, delay] : taps)
        for (std::size_t n = 0; n < x.size(); ++n) {
            const auto m = static_cast<std::ptrdiff_t>(n) - delay;
            if (m >= 0 && m < static_cast<std::ptrdiff_t>(x.size()))
                out[n] += gain * x[static_cast<std::size_t>(m)];
        }
    return out;
}

double measure_tone_hz(const CVec& x, double sample_rate_hz) {
    std::size_t padded = 1;
    while (padded < x.size()) padded <<= 1;
    CVec work(padded, cplx{0.0, 0.0});
    std::copy(x.begin(), x.end(), work.begin());
    dsp::fft_inplace(work);

    std::size_t best = 0;
    double best_mag = 0.0;
    for (std::size_t m = 0; m < padded; ++m)
        if (std::norm(work[m]) > best_mag) {
            best_mag = std::norm(work[m]);
            best = m;
        }

    const double bin = sample_rate_hz / static_cast<double>(padded);
    double lo = (static_cast<double>(best) - 1.0) * bin;
    double hi = (static_cast<double>(best) + 1.0) * bin;
    for (int it = 0; it < 80; ++it) {
        const double f1 = lo + (hi - lo) / 3.0;
        const double f2 = hi - (hi - lo) / 3.0;
        if (std::norm(dtft_point(x, f1, sample_rate_hz)) <
            std::norm(dtft_point(x, f2, sample_rate_hz)))
            lo = f1;
        else
            hi = f2;
    }
    return 0.5 * (lo + hi);
}

}  // namespace icilab::ref
