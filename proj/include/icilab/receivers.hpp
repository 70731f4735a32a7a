#pragma once

#include "icilab/estimator.hpp"
#include "icilab/rxfront.hpp"
#include "icilab/types.hpp"

#include <span>
#include <string>

namespace icilab {

enum class ReceiverKind { ConvFFT, PFFT, FFFT, AFFT };

std::string receiver_name(ReceiverKind kind);
ReceiverKind receiver_from_name(const std::string& name);

struct ReceiverParams {
    int taps = 3;              // M: segments for P-FFT, 2A+1 for F-FFT/A-FFT
    double fe_fixed_hz = 0.0;  // F-FFT fiducial offset; 0 -> carrier spacing
    EstimatorConfig estimator;
};

struct ReceiverOutput {
    std::vector<CVec> bhat;  // per block, soft symbols for k = 1..K-1
    double fe_hat = 0.0;     // A-FFT diagnostics
    int estimator_iterations = 0;
    double estimator_initial_mse = 0.0;
    std::vector<double> estimator_trace;
};

// Runs one end-to-end receiver over a frame. Pilots are the known symbols
// b_1..b_P of block 0; the A-FFT estimates its fiducial offset from them
// and holds it fixed across the frame.
ReceiverOutput run_receiver(ReceiverKind kind, const ReceivedFrame& frame,
                            std::span<const cplx> pilots, const OfdmConfig& cfg,
                            const ReceiverParams& params = {});

// 10 log10(mean |b - bhat|^2), floored at -150 dB.
double detection_mse_db(const CVec& bhat, const CVec& btrue);

// Frame-level MSE over data carriers only: pilots (block 0, k = 1..P) are
// excluded.
double frame_mse_db(const std::vector<CVec>& bhat, const std::vector<CVec>& btrue,
                    int pilot_count);

}  // namespace icilab
