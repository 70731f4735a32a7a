#pragma once

#include "icilab/demod_bank.hpp"
#include "icilab/types.hpp"

#include <span>

namespace icilab {

struct EstimatorConfig {
    double mu_w = 0.5;      // weight step (NLMS-scaled when gradient_scaling)
    double mu_fe = -1.0;    // f_e step; < 0 auto-calibrates, 0 freezes f_e
    double eta_db = 0.01;   // outer stop: 10|log10(E_i/E_{i+1})| < eta
    int max_outer = 50;     // N_I
    int max_inner = 50;
    double fe_init_hz = 0.0;  // 0 -> carrier spacing
    bool gradient_scaling = true;
    double error_threshold = 1.0;  // decision-directed update gate
    double nlms_eps = 1e-8;

    // Safeguards around the raw recursions: per-step |df_e| cap and hard
    // f_e bounds, both as fractions of the carrier spacing.
    double fe_step_cap_frac = 0.05;
    double fe_bound_lo_frac = 0.1;
    double fe_bound_hi_frac = 5.0;
    double inner_stall_rel = 1e-6;
    double converge_floor = 1e-12;  // stop outer loop once E is this small

    // The pilots occupy the low edge of the band, so the pilot-optimal
    // offset tracks the Doppler shift at the pilot-band center. Rescaling
    // by f_c over the mean pilot frequency refers the returned offset to
    // the band center that the whole frame is demodulated against. No-op
    // when the f_e loop is disabled.
    bool fe_band_reference = true;
};

// Pilot-only combiner training on one bank (any kind): cyclic coordinate
// descent with backtracking, initialized per bank kind. Returns P+1 weight
// rows (row 0 is the fixed reference for carrier 0).
WeightSet train_pilot_weights(const DemodBank& bank, std::span<const cplx> pilots,
                              const EstimatorConfig& ecfg);

struct EstimatorResult {
    double fe_hat = 0.0;
    WeightSet pilot_weights;        // rows 0..P; row 0 is the fixed reference
    std::vector<double> mse_trace;  // composite MSE after each outer iteration
    std::vector<double> fe_trace;   // f_e after each outer iteration
    double initial_mse = 0.0;
    double initial_fe = 0.0;
    int iterations = 0;
};

// Composite MSE E = sum_{k in pilots} |b_k - x_k/x_{k-1}|^2 on block 0.
// weights has P+1 rows (carrier 0 first), taps = 2A+1.
double composite_mse(const ComplexBlock& block0, std::span<const cplx> pilots,
                     const WeightSet& weights, double fe_hz, int half_span,
                     const OfdmConfig& cfg);

// Fiducial-offset gradient: gamma = sum Im{(x~_k x_{k-1} - x~_{k-1} x_k)
// / (x_{k-1})^2 e_k*} with x~_k = w_k^H (beta o z~_k). Stepping
// f_e += mu gamma descends E (dE/df_e = -(4 pi/(A+1)) gamma).
double grad_fe(const ComplexBlock& block0, std::span<const cplx> pilots,
               const WeightSet& weights, double fe_hz, int half_span,
               const OfdmConfig& cfg);

// Weight gradient for pilot p (1-based within the pilot set):
// g = z_p e_p*/x_{p-1} - z_p x_{p+1} e_{p+1}*/(x_p)^2; the look-ahead term
// is dropped for the last pilot. w += mu g descends E.
CVec grad_w(const ComplexBlock& block0, std::span<const cplx> pilots,
            const WeightSet& weights, double fe_hz, int half_span,
            const OfdmConfig& cfg, int p);

// Coordinate descent of Algorithm-1 shape: cyclic per-pilot weight steps,
// then gradient steps on f_e, with backtracking so every accepted outer
// iterate is non-increasing in E.
EstimatorResult estimate_fiducial_offset(const ComplexBlock& block0,
                                         std::span<const cplx> pilots,
                                         int half_span, const OfdmConfig& cfg,
                                         const EstimatorConfig& ecfg = {});

// Weight-only descent at a fixed f_e (the budget-matched evaluation used
// by grid searches): returns the final composite MSE.
double adapted_pilot_mse(const ComplexBlock& block0, std::span<const cplx> pilots,
                         int half_span, const OfdmConfig& cfg,
                         const EstimatorConfig& ecfg, double fe_hz);

struct FrameAdaptResult {
    std::vector<CVec> detected;  // per block, soft b-hat for k = 1..K-1
    WeightSet weights;           // per-carrier weights as of the last block
    int updates_applied = 0;
    int updates_skipped = 0;
};

// Shared frame-wide combiner adaptation: pilot training on block 0 then
// decision-directed LMS across data carriers, weights carried carrier to
// carrier and block to block. Gradient scaling normalizes by the bank-row
// energy; updates with |e_k| above error_threshold are skipped.
FrameAdaptResult adapt_weights_frame(const std::vector<DemodBank>& banks,
                                     std::span<const cplx> pilots,
                                     const OfdmConfig& cfg,
                                     const EstimatorConfig& ecfg);

}  // namespace icilab
