#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace icilab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// ---- error taxonomy ----

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degenerate denominator in differential detection (catastrophically faded
// carrier).
struct degenerate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct framing_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct divergence_error : std::runtime_error {
    std::vector<double> mse_trace;
    divergence_error(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), mse_trace(std::move(trace)) {}
};

// ---- waveform configuration ----

struct OfdmConfig {
    int carrier_count = 1024;           // K
    int block_count = 8;                // N
    double bandwidth_hz = 12000.0;      // B
    double center_freq_hz = 32000.0;    // f_c
    double sample_rate_hz = 192000.0;   // f_s
    double guard_interval_s = 0.016;    // T_g
    int psk_order = 4;                  // Q
    int pilot_count = 200;              // P
    cplx reference_symbol{1.0, 0.0};    // c

    double carrier_spacing_hz() const { return bandwidth_hz / carrier_count; }
    double block_duration_s() const { return 1.0 / carrier_spacing_hz(); }

    int oversample() const {
        return static_cast<int>(std::llround(sample_rate_hz / bandwidth_hz));
    }
    int samples_per_block() const { return carrier_count * oversample(); }
    int guard_samples() const {
        return static_cast<int>(std::ceil(guard_interval_s * sample_rate_hz - 1e-6));
    }
    int samples_per_block_with_guard() const {
        return samples_per_block() + guard_samples();
    }
    int samples_per_frame() const {
        return block_count * samples_per_block_with_guard();
    }

    // The K carriers straddle the band center: f_0 = f_c - B/2 + df/2.
    double lowest_carrier_hz() const {
        return center_freq_hz - bandwidth_hz / 2.0 + carrier_spacing_hz() / 2.0;
    }

    void validate() const;
};

// ---- channel specification ----

struct ChannelPath {
    cplx gain{1.0, 0.0};
    double delay_s = 0.0;
    double phase_drift_rad_s = 0.0;  // deterministic slow rotation, default off
};

struct ChannelSpec {
    std::vector<ChannelPath> paths{ChannelPath{}};
    double doppler_factor = 0.0;  // alpha
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 1;

    void validate(const OfdmConfig& cfg) const;

    // Repo default desk channel: 3 paths, gains (1, 0.5 e^{j pi/4},
    // 0.25 e^{-j pi/3}), delays (0, 2 ms, 5 ms).
    static ChannelSpec default_three_path();
};

// ---- sample containers ----

// One OFDM block of complex baseband samples on the f_s grid.
struct ComplexBlock {
    CVec samples;
    double t0 = 0.0;  // start of the useful interval
    double dt = 0.0;  // 1/f_s
};

inline double db_from_linear(double x) {
    return 10.0 * std::log10(x);
}
inline double linear_from_db(double x) {
    return std::pow(10.0, x / 10.0);
}

}  // namespace icilab
