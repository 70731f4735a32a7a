#include "icilab/rxfront.hpp"

#include "icilab/channel.hpp"

#include <cmath>
#include <numbers>

namespace icilab {

ReceivedFrame front_end(const CVec& received, const OfdmConfig& cfg,
                        const FrontEndOptions& opts) {
    const double fs = cfg.sample_rate_hz;
    const double f0 = cfg.lowest_carrier_hz();
    const double ac = opts.coarse_alpha;

    CVec stream;
    if (ac != 0.0) {
        // Counter-rotate on the original grid, then undo the time scaling.
        CVec derot(received.size());
        const double step = -2.0 * std::numbers::pi * f0 * ac / fs;
#pragma omp parallel for schedule(static)
        for (std::size_t n = 0; n < received.size(); ++n)
            derot[n] = received[n] * std::polar(1.0, step * static_cast<double>(n));
        stream = resample_doppler(derot, -ac / (1.0 + ac));
    } else {
        stream = received;
    }

    // Residual scale seen by the block slicer after coarse resampling.
    const double residual_timing = (opts.timing_alpha - ac) / (1.0 + ac);
    const double window_scale = 1.0 / (1.0 + residual_timing);

    const int nsamp = cfg.samples_per_block();
    const int ng = cfg.guard_samples();
    const int stride = nsamp + ng;

    ReceivedFrame frame;
    frame.residual_doppler = (opts.true_alpha - ac) / (1.0 + ac);
    frame.blocks.resize(cfg.block_count);

    for (int b = 0; b < cfg.block_count; ++b) {
        const auto nominal = static_cast<double>(b) * stride + ng;
        const auto start = static_cast<std::size_t>(std::llround(nominal * window_scale));
        if (start + nsamp > stream.size())
            throw framing_error("front_end: stream too short for block " +
                                std::to_string(b));
        ComplexBlock& blk = frame.blocks[b];
        blk.samples.assign(stream.begin() + start, stream.begin() + start + nsamp);
        blk.dt = 1.0 / fs;
        blk.t0 = static_cast<double>(start) / fs;
    }
    return frame;
}

}  // namespace icilab
