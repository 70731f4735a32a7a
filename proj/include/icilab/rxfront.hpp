#pragma once

#include "icilab/types.hpp"

namespace icilab {

struct ReceivedFrame {
    std::vector<ComplexBlock> blocks;  // N blocks, guard stripped
    double residual_doppler = 0.0;     // diagnostics only
};

struct FrontEndOptions {
    // Doppler factor removed by coarse resampling (0 = receivers face all
    // of it, the default experiment policy).
    double coarse_alpha = 0.0;
    // Block-window placement tracks this residual scale factor. Frame
    // timing is idealized, so the harness normally passes the true alpha
    // here; demodulators never read it.
    double timing_alpha = 0.0;
    // True channel alpha, used only to record residual_doppler.
    double true_alpha = 0.0;
};

// Frame alignment at known timing, coarse Doppler removal (resample +
// counter-rotation at f_0), guard-interval discard.
ReceivedFrame front_end(const CVec& received, const OfdmConfig& cfg,
                        const FrontEndOptions& opts = {});

}  // namespace icilab
