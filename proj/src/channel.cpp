#include "icilab/channel.hpp"

#include "icilab/fft.hpp"
#include "icilab/rng.hpp"

#include <cmath>
#include <numbers>

namespace icilab {

namespace {

// Min 4-term Blackman-Harris; coefficients sum to exactly 1.
constexpr double kBH0 = 0.35875;
constexpr double kBH1 = 0.48829;
constexpr double kBH2 = 0.14128;
constexpr double kBH3 = 0.01168;

inline double bh4_window(double u) {
    // u in [-1, 1]
    const double c1 = std::cos(std::numbers::pi * u);
    const double c2 = 2.0 * c1 * c1 - 1.0;
    const double c3 = (2.0 * c2 - 1.0) * c1;
    return kBH0 + kBH1 * c1 + kBH2 * c2 + kBH3 * c3;
}

}  // namespace

cplx interp_at(std::span<const cplx> x, double pos, int half_taps) {
    const auto size = static_cast<std::ptrdiff_t>(x.size());
    const double fl = std::floor(pos);
    const auto base = static_cast<std::ptrdiff_t>(fl);
    const double frac = pos - fl;

    if (frac == 0.0) {
        if (base < 0 || base >= size) return cplx{0.0, 0.0};
        return x[static_cast<std::size_t>(base)];
    }

    const int h = half_taps;
    const double s_over_pi = std::sin(std::numbers::pi * frac) / std::numbers::pi;

    cplx acc{0.0, 0.0};
    // taps m = -(h-1) .. h relative to base; sin(pi(pos-n)) = +-sin(pi frac)
    for (int m = -(h - 1); m <= h; ++m) {
        const std::ptrdiff_t n = base + m;
        if (n < 0 || n >= size) continue;
        const double d = frac - m;                  // pos - n
        const double sign = (m & 1) ? -1.0 : 1.0;   // cos(pi m)
        const double sinc = sign * s_over_pi / d;
        const double w = bh4_window(d / h);
        acc += x[static_cast<std::size_t>(n)] * (sinc * w);
    }
    return acc;
}

CVec resample_doppler(const CVec& signal, double factor) {
    if (std::abs(factor) >= 1e-2)
        throw config_error("resample factor exceeds sanity bound 1e-2");
    if (factor == 0.0) return signal;

    const double rate = 1.0 + factor;
    const auto out_len = static_cast<std::size_t>(
        std::floor(static_cast<double>(signal.size()) / rate));
    CVec out(out_len);
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < out_len; ++n)
        out[n] = interp_at(signal, static_cast<double>(n) * rate);
    return out;
}

CVec apply_channel(const CVec& frame_baseband, const ChannelSpec& spec,
                   const OfdmConfig& cfg) {
    if (frame_baseband.empty()) throw shape_error("apply_channel: empty frame");
    spec.validate(cfg);

    const double fs = cfg.sample_rate_hz;
    const double f0 = cfg.lowest_carrier_hz();
    const double alpha = spec.doppler_factor;
    const std::size_t len = frame_baseband.size();

    struct PathState {
        cplx gain;          // path gain with carrier phase folded in
        double delay_samp;  // tau_l * f_s
        double drift;       // rad per sample
        bool integer_delay;
        std::ptrdiff_t idelay;
    };
    std::vector<PathState> paths;
    paths.reserve(spec.paths.size());
    for (const auto& p : spec.paths) {
        PathState ps;
        ps.gain = p.gain * std::polar(1.0, -2.0 * std::numbers::pi * f0 * p.delay_s);
        ps.delay_samp = p.delay_s * fs;
        ps.drift = p.phase_drift_rad_s / fs;
        const double r = std::round(ps.delay_samp);
        ps.integer_delay = std::abs(ps.delay_samp - r) < 1e-9;
        ps.idelay = static_cast<std::ptrdiff_t>(r);
        paths.push_back(ps);
    }

    bool fast = (alpha == 0.0);
    for (const auto& ps : paths)
        fast = fast && ps.integer_delay && ps.drift == 0.0;

    CVec out(len, cplx{0.0, 0.0});
    if (fast) {
        // Identity special case keeps bit-exactness through unit gain.
        for (const auto& ps : paths) {
#pragma omp parallel for schedule(static)
            for (std::size_t n = 0; n < len; ++n) {
                const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n) - ps.idelay;
                if (m >= 0 && m < static_cast<std::ptrdiff_t>(len))
                    out[n] += ps.gain * frame_baseband[static_cast<std::size_t>(m)];
            }
        }
        return out;
    }

    const double rot_step = 2.0 * std::numbers::pi * f0 * alpha / fs;
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < len; ++n) {
        const double t = static_cast<double>(n);
        cplx acc{0.0, 0.0};
        for (const auto& ps : paths) {
            const double pos = (1.0 + alpha) * t - ps.delay_samp;
            cplx g = ps.gain;
            if (ps.drift != 0.0) g *= std::polar(1.0, ps.drift * t);
            acc += g * interp_at(frame_baseband, pos);
        }
        out[n] = acc * std::polar(1.0, rot_step * t);
    }
    return out;
}

CVec apply_channel_passband(const CVec& frame_baseband, const ChannelSpec& spec,
                            const OfdmConfig& cfg) {
    spec.validate(cfg);
    const double fs = cfg.sample_rate_hz;
    const double f0 = cfg.lowest_carrier_hz();
    const double alpha = spec.doppler_factor;
    const std::size_t len = frame_baseband.size();

    // Analytic passband carries the complex path gains.
    CVec analytic(len);
    const double step = 2.0 * std::numbers::pi * f0 / fs;
    for (std::size_t n = 0; n < len; ++n)
        analytic[n] = frame_baseband[n] * std::polar(1.0, step * static_cast<double>(n));

    RVec passband(len, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < len; ++n) {
        const double t = static_cast<double>(n);
        cplx acc{0.0, 0.0};
        for (const auto& p : spec.paths) {
            const double pos = (1.0 + alpha) * t - p.delay_s * fs;
            cplx g = p.gain;
            if (p.phase_drift_rad_s != 0.0)
                g *= std::polar(1.0, p.phase_drift_rad_s * t / fs);
            acc += g * interp_at(analytic, pos);
        }
        passband[n] = acc.real();
    }

    // Mix down by f_0 and brickwall at +-f_s/4 (removes the -2 f_0 image).
    std::size_t padded = 1;
    while (padded < len) padded <<= 1;
    CVec work(padded, cplx{0.0, 0.0});
    for (std::size_t n = 0; n < len; ++n)
        work[n] = 2.0 * passband[n] * std::polar(1.0, -step * static_cast<double>(n));

    dsp::fft_inplace(work);
    const std::size_t cut = padded / 4;
    for (std::size_t m = 0; m < padded; ++m) {
        const std::size_t dist = std::min(m, padded - m);
        if (dist > cut) work[m] = cplx{0.0, 0.0};
    }
    dsp::fft_inplace(work, /*inverse=*/true);

    CVec out(len);
    const double scale = 1.0 / static_cast<double>(padded);
    for (std::size_t n = 0; n < len; ++n) out[n] = work[n] * scale;
    return out;
}

CVec add_noise(const CVec& signal, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return signal;

    double power = 0.0;
    for (const cplx& s : signal) power += std::norm(s);
    power /= static_cast<double>(signal.size());
    if (power <= 0.0) throw shape_error("add_noise: zero-power signal");

    const double sigma2 = power / linear_from_db(snr_db);
    const double amp = std::sqrt(sigma2 / 2.0);

    std::mt19937_64 rng(seed);
    CVec out(signal.size());
    for (std::size_t n = 0; n < signal.size(); ++n) {
        double g0, g1;
        gaussian_pair(rng, g0, g1);
        out[n] = signal[n] + cplx{amp * g0, amp * g1};
    }
    return out;
}

}  // namespace icilab
