#include "icilab/types.hpp"

#include "icilab/fft.hpp"

#include <numbers>

namespace icilab {

void OfdmConfig::validate() const {
    if (carrier_count < 2) throw config_error("carrier_count must be >= 2");
    if (block_count < 1) throw config_error("block_count must be >= 1");
    if (bandwidth_hz <= 0 || sample_rate_hz <= 0)
        throw config_error("bandwidth and sample rate must be positive");

    const double ratio = sample_rate_hz / bandwidth_hz;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw config_error("sample_rate must be an integer multiple of bandwidth");

    if (!dsp::is_power_of_two(static_cast<std::size_t>(samples_per_block())))
        throw config_error("carrier_count * oversample must be a power of two "
                           "(got " + std::to_string(samples_per_block()) + ")");

    if (guard_interval_s < 0) throw config_error("guard_interval must be >= 0");
    switch (psk_order) {
        case 2: case 4: case 8: break;
        default: throw config_error("psk_order must be 2, 4 or 8");
    }
    if (pilot_count < 2 || pilot_count > carrier_count - 1)
        throw config_error("pilot_count must satisfy 2 <= P <= K-1");
    if (std::abs(std::abs(reference_symbol) - 1.0) > 1e-12)
        throw config_error("reference symbol must be unit modulus");
    if (center_freq_hz + bandwidth_hz / 2.0 >= sample_rate_hz / 2.0)
        throw config_error("passband violates Nyquist: f_c + B/2 >= f_s/2");
}

void ChannelSpec::validate(const OfdmConfig& cfg) const {
    if (paths.empty()) throw config_error("channel needs at least one path");
    for (const auto& p : paths) {
        if (p.delay_s < 0)
            throw config_error("path delay must be >= 0");
        if (p.delay_s >= cfg.guard_interval_s)
            throw config_error("path delay " + std::to_string(p.delay_s) +
                               " s exceeds guard interval; model invalid");
    }
    if (std::abs(doppler_factor) > 1e-2)
        throw config_error("doppler factor exceeds sanity bound 1e-2");
}

ChannelSpec ChannelSpec::default_three_path() {
    ChannelSpec spec;
    spec.paths = {
        {cplx{1.0, 0.0}, 0.0, 0.0},
        {std::polar(0.5, std::numbers::pi / 4.0), 0.002, 0.0},
        {std::polar(0.25, -std::numbers::pi / 3.0), 0.005, 0.0},
    };
    return spec;
}

}  // namespace icilab
