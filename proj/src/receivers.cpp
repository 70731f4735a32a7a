#include "icilab/receivers.hpp"

#include "icilab/demod_bank.hpp"
#include "icilab/signal_model.hpp"

#include <cmath>

namespace icilab {

std::string receiver_name(ReceiverKind kind) {
    switch (kind) {
        case ReceiverKind::ConvFFT: return "conv-fft";
        case ReceiverKind::PFFT: return "p-fft";
        case ReceiverKind::FFFT: return "f-fft";
        case ReceiverKind::AFFT: return "a-fft";
    }
    throw config_error("unknown receiver kind");
}

ReceiverKind receiver_from_name(const std::string& name) {
    if (name == "conv-fft") return ReceiverKind::ConvFFT;
    if (name == "p-fft") return ReceiverKind::PFFT;
    if (name == "f-fft") return ReceiverKind::FFFT;
    if (name == "a-fft") return ReceiverKind::AFFT;
    throw config_error("unknown receiver '" + name + "'");
}

namespace {

std::vector<DemodBank> fractional_banks(const ReceivedFrame& frame, int half_span,
                                        double fe_hz, const OfdmConfig& cfg) {
    std::vector<DemodBank> banks(frame.blocks.size());
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < frame.blocks.size(); ++b)
        banks[b] = fractional_bank(frame.blocks[b], half_span, fe_hz, cfg);
    return banks;
}

ReceiverOutput conv_receiver(const ReceivedFrame& frame, const OfdmConfig& cfg) {
    ReceiverOutput out;
    out.bhat.resize(frame.blocks.size());
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < frame.blocks.size(); ++b)
        out.bhat[b] = differential_decode(conv_fft(frame.blocks[b], cfg));
    return out;
}

}  // namespace

ReceiverOutput run_receiver(ReceiverKind kind, const ReceivedFrame& frame,
                            std::span<const cplx> pilots, const OfdmConfig& cfg,
                            const ReceiverParams& params) {
    if (frame.blocks.empty()) throw shape_error("run_receiver: empty frame");

    if (kind == ReceiverKind::ConvFFT) return conv_receiver(frame, cfg);

    if (pilots.empty()) throw shape_error("run_receiver: pilots required");

    std::vector<DemodBank> banks;
    ReceiverOutput out;

    switch (kind) {
        case ReceiverKind::PFFT: {
            banks.resize(frame.blocks.size());
#pragma omp parallel for schedule(static)
            for (std::size_t b = 0; b < frame.blocks.size(); ++b)
                banks[b] = partial_bank(frame.blocks[b], params.taps, cfg);
            break;
        }
        case ReceiverKind::FFFT: {
            if (params.taps % 2 == 0)
                throw config_error("f-fft taps must be odd (M = 2A+1)");
            const double fe = params.fe_fixed_hz > 0 ? params.fe_fixed_hz
                                                     : cfg.carrier_spacing_hz();
            banks = fractional_banks(frame, (params.taps - 1) / 2, fe, cfg);
            break;
        }
        case ReceiverKind::AFFT: {
            if (params.taps % 2 == 0)
                throw config_error("a-fft taps must be odd (M = 2A+1)");
            const int half_span = (params.taps - 1) / 2;
            const EstimatorResult est = estimate_fiducial_offset(
                frame.blocks.front(), pilots, half_span, cfg, params.estimator);
            out.fe_hat = est.fe_hat;
            out.estimator_iterations = est.iterations;
            out.estimator_initial_mse = est.initial_mse;
            out.estimator_trace = est.mse_trace;
            banks = fractional_banks(frame, half_span, est.fe_hat, cfg);
            break;
        }
        default:
            throw config_error("unknown receiver kind");
    }

    FrameAdaptResult adapted =
        adapt_weights_frame(banks, pilots, cfg, params.estimator);
    out.bhat = std::move(adapted.detected);
    return out;
}

double detection_mse_db(const CVec& bhat, const CVec& btrue) {
    if (bhat.size() != btrue.size())
        throw shape_error("detection_mse: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < bhat.size(); ++i)
        acc += std::norm(btrue[i] - bhat[i]);
    const double mean = acc / static_cast<double>(bhat.size());
    if (mean <= 1e-15) return -150.0;
    return std::max(db_from_linear(mean), -150.0);
}

double frame_mse_db(const std::vector<CVec>& bhat, const std::vector<CVec>& btrue,
                    int pilot_count) {
    if (bhat.size() != btrue.size())
        throw shape_error("frame_mse: block count mismatch");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < bhat.size(); ++b) {
        if (bhat[b].size() != btrue[b].size())
            throw shape_error("frame_mse: carrier count mismatch");
        // bhat[b][k-1] corresponds to carrier k; block 0 carriers 1..P are
        // pilots.
        const std::size_t first = (b == 0) ? static_cast<std::size_t>(pilot_count) : 0;
        for (std::size_t i = first; i < bhat[b].size(); ++i) {
            acc += std::norm(btrue[b][i] - bhat[b][i]);
            ++count;
        }
    }
    if (count == 0) throw shape_error("frame_mse: no data carriers");
    const double mean = acc / static_cast<double>(count);
    if (mean <= 1e-15) return -150.0;
    return std::max(db_from_linear(mean), -150.0);
}

}  // namespace icilab
