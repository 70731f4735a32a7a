#include "icilab/estimator.hpp"

#include "icilab/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace icilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PilotView {
    int P = 0;
    int A = 0;
    int M = 0;

    void check(std::span<const cplx> pilots, const WeightSet& w, int half_span,
               const OfdmConfig& cfg) {
        P = static_cast<int>(pilots.size());
        A = half_span;
        M = 2 * half_span + 1;
        if (P < 1) throw shape_error("estimator: need at least one pilot");
        if (P > cfg.carrier_count - 1)
            throw shape_error("estimator: pilot set exceeds carrier count");
        if (w.carriers != P + 1 || w.taps != M)
            throw shape_error("estimator: weights must be (P+1) x (2A+1)");
    }
};

// x_k = w_k^H z_k for carriers 0..P; e_k = b_k - x_k/x_{k-1} for 1..P.
// Returns E, or +inf when a denominator vanishes.
double eval_pilots(const DemodBank& bank, const WeightSet& w,
                   std::span<const cplx> pilots, CVec& x, CVec& e) {
    const int P = static_cast<int>(pilots.size());
    x.resize(P + 1);
    e.assign(P + 1, cplx{0.0, 0.0});
    for (int k = 0; k <= P; ++k) x[k] = dot_wh_z(w.row(k), bank.row(k));

    double energy = 0.0;
    for (int k = 1; k <= P; ++k) {
        if (x[k - 1] == cplx{0.0, 0.0}) return kInf;
        e[k] = pilots[k - 1] - x[k] / x[k - 1];
        energy += std::norm(e[k]);
    }
    return energy;
}

// x~_k = w_k^H (beta o z~_k), beta_a = a.
cplx tilde_x(const DemodBank& tw_bank, const WeightSet& w, int k, int A) {
    cplx acc{0.0, 0.0};
    const auto zt = tw_bank.row(k);
    const auto wk = w.row(k);
    for (int a = -A; a <= A; ++a)
        acc += std::conj(wk[a + A]) * (static_cast<double>(a) * zt[a + A]);
    return acc;
}

double gamma_from(const DemodBank& tw_bank, const WeightSet& w,
                  std::span<const cplx> pilots, int A, const CVec& x,
                  const CVec& e) {
    const int P = static_cast<int>(pilots.size());
    CVec xt(P + 1);
    for (int k = 0; k <= P; ++k) xt[k] = tilde_x(tw_bank, w, k, A);

    double gamma = 0.0;
    for (int k = 1; k <= P; ++k) {
        const cplx den = x[k - 1] * x[k - 1];
        if (den == cplx{0.0, 0.0})
            throw degenerate_error("grad_fe: zero detection reference");
        const cplx num = xt[k] * x[k - 1] - xt[k - 1] * x[k];
        gamma += std::imag(num / den * std::conj(e[k]));
    }
    return gamma;
}

CVec weight_gradient(const DemodBank& bank, std::span<const cplx> pilots,
                     const CVec& x, const CVec& e, int p) {
    const int P = static_cast<int>(pilots.size());
    if (p < 1 || p > P) throw shape_error("grad_w: pilot index out of range");
    if (x[p - 1] == cplx{0.0, 0.0} || x[p] == cplx{0.0, 0.0})
        throw degenerate_error("grad_w: zero detection reference");

    const auto zp = bank.row(p);
    CVec g(zp.size());
    const cplx c1 = std::conj(e[p]) / x[p - 1];
    cplx c2{0.0, 0.0};
    if (p < P) c2 = x[p + 1] * std::conj(e[p + 1]) / (x[p] * x[p]);
    for (std::size_t a = 0; a < zp.size(); ++a) g[a] = zp[a] * (c1 - c2);
    return g;
}

struct Banks {
    DemodBank z;
    DemodBank zt;
    double fe = 0.0;
};

Banks build_banks(const ComplexBlock& block0, int A, double fe,
                  const OfdmConfig& cfg) {
    Banks b;
    b.z = fractional_bank(block0, A, fe, cfg);
    b.zt = time_weighted_bank(block0, A, fe, cfg);
    b.fe = fe;
    return b;
}

}  // namespace

double composite_mse(const ComplexBlock& block0, std::span<const cplx> pilots,
                     const WeightSet& weights, double fe_hz, int half_span,
                     const OfdmConfig& cfg) {
    PilotView view;
    view.check(pilots, weights, half_span, cfg);
    const DemodBank bank = fractional_bank(block0, half_span, fe_hz, cfg);
    CVec x, e;
    const double energy = eval_pilots(bank, weights, pilots, x, e);
    if (!std::isfinite(energy))
        throw degenerate_error("composite_mse: zero detection reference");
    return energy;
}

double grad_fe(const ComplexBlock& block0, std::span<const cplx> pilots,
               const WeightSet& weights, double fe_hz, int half_span,
               const OfdmConfig& cfg) {
    PilotView view;
    view.check(pilots, weights, half_span, cfg);
    const Banks banks = build_banks(block0, half_span, fe_hz, cfg);
    CVec x, e;
    if (!std::isfinite(eval_pilots(banks.z, weights, pilots, x, e)))
        throw degenerate_error("grad_fe: zero detection reference");
    return gamma_from(banks.zt, weights, pilots, half_span, x, e);
}

CVec grad_w(const ComplexBlock& block0, std::span<const cplx> pilots,
            const WeightSet& weights, double fe_hz, int half_span,
            const OfdmConfig& cfg, int p) {
    PilotView view;
    view.check(pilots, weights, half_span, cfg);
    const DemodBank bank = fractional_bank(block0, half_span, fe_hz, cfg);
    CVec x, e;
    if (!std::isfinite(eval_pilots(bank, weights, pilots, x, e)))
        throw degenerate_error("grad_w: zero detection reference");
    return weight_gradient(bank, pilots, x, e, p);
}

namespace {

// During offset estimation one combiner is shared by every pilot carrier.
// Untied per-pilot weights can drive the pilot MSE to its floor at any
// f_e (each carrier chain is then exactly solvable), which erases the f_e
// dependence of E; a shared combiner also cancels out of the detection
// ratios as a common factor, so E can only drop when the bank geometry
// itself compensates the offset. The per-carrier freedom stays with the
// frame adaptation.
double eval_tied(const DemodBank& bank, const CVec& wbar,
                 std::span<const cplx> pilots, CVec& x, CVec& e) {
    const int P = static_cast<int>(pilots.size());
    x.resize(P + 1);
    e.assign(P + 1, cplx{0.0, 0.0});
    for (int k = 0; k <= P; ++k) x[k] = dot_wh_z(wbar, bank.row(k));
    double energy = 0.0;
    for (int k = 1; k <= P; ++k) {
        if (x[k - 1] == cplx{0.0, 0.0}) return kInf;
        e[k] = pilots[k - 1] - x[k] / x[k - 1];
        energy += std::norm(e[k]);
    }
    return energy;
}

// Sum of the Eq.-(21) quotient-rule terms over all pilots for the shared
// combiner: g = sum_p (z_p e_p*/x_{p-1} - z_{p-1} x_p e_p*/(x_{p-1})^2).
CVec tied_weight_gradient(const DemodBank& bank, std::span<const cplx> pilots,
                          const CVec& x, const CVec& e) {
    const int P = static_cast<int>(pilots.size());
    CVec g(bank.columns, cplx{0.0, 0.0});
    for (int p = 1; p <= P; ++p) {
        if (x[p - 1] == cplx{0.0, 0.0}) continue;
        const cplx c1 = std::conj(e[p]) / x[p - 1];
        const cplx c2 = x[p] * std::conj(e[p]) / (x[p - 1] * x[p - 1]);
        const auto zp = bank.row(p);
        const auto zm = bank.row(p - 1);
        for (int a = 0; a < bank.columns; ++a) g[a] += zp[a] * c1 - zm[a] * c2;
    }
    return g;
}

// A few backtracked tied-gradient steps on w. Mutates w, x, e; returns
// the (non-increasing) energy.
double tied_weight_descent(const DemodBank& bank, std::span<const cplx> pilots,
                           const EstimatorConfig& ecfg, int steps, CVec& w,
                           CVec& x, CVec& e, double energy) {
    for (int j = 0; j < steps && energy > ecfg.converge_floor; ++j) {
        const double before = energy;
        CVec g = tied_weight_gradient(bank, pilots, x, e);
        double gnorm = 0.0;
        for (const cplx& ga : g) gnorm += std::norm(ga);
        if (gnorm <= 0.0) break;
        double scale = ecfg.mu_w;
        if (ecfg.gradient_scaling) scale *= energy / gnorm;
        double s = 1.0;
        for (int bt = 0; bt < 24; ++bt) {
            CVec trial = w;
            for (std::size_t a = 0; a < trial.size(); ++a)
                trial[a] += s * scale * g[a];
            CVec xt_, et_;
            const double et = eval_tied(bank, trial, pilots, xt_, et_);
            if (et <= energy) {
                w = std::move(trial);
                x = std::move(xt_);
                e = std::move(et_);
                energy = et;
                break;
            }
            s *= 0.5;
        }
        if (before - energy < ecfg.inner_stall_rel * std::max(before, 1e-300))
            break;
    }
    return energy;
}

double tied_gamma(const DemodBank& tw_bank, const CVec& wbar,
                  std::span<const cplx> pilots, int A, const CVec& x,
                  const CVec& e) {
    const int P = static_cast<int>(pilots.size());
    CVec xt(P + 1);
    for (int k = 0; k <= P; ++k) {
        cplx acc{0.0, 0.0};
        const auto zt = tw_bank.row(k);
        for (int a = -A; a <= A; ++a)
            acc += std::conj(wbar[a + A]) * (static_cast<double>(a) * zt[a + A]);
        xt[k] = acc;
    }
    double gamma = 0.0;
    for (int k = 1; k <= P; ++k) {
        const cplx den = x[k - 1] * x[k - 1];
        if (den == cplx{0.0, 0.0}) continue;
        gamma += std::imag((xt[k] * x[k - 1] - xt[k - 1] * x[k]) / den *
                           std::conj(e[k]));
    }
    return gamma;
}

}  // namespace

EstimatorResult estimate_fiducial_offset(const ComplexBlock& block0,
                                         std::span<const cplx> pilots,
                                         int half_span, const OfdmConfig& cfg,
                                         const EstimatorConfig& ecfg) {
    const int P = static_cast<int>(pilots.size());
    if (P < 2) throw shape_error("estimate_fiducial_offset: need P >= 2 pilots");
    const int M = 2 * half_span + 1;
    const double df = cfg.carrier_spacing_hz();
    const double fe_lo = ecfg.fe_bound_lo_frac * df;
    const double fe_hi = ecfg.fe_bound_hi_frac * df;
    const double step_cap = ecfg.fe_step_cap_frac * df;

    double fe = ecfg.fe_init_hz > 0 ? ecfg.fe_init_hz : df;
    fe = std::clamp(fe, fe_lo, fe_hi);

    CVec wbar(M, cplx{0.0, 0.0});
    wbar[M / 2] = cplx{1.0, 0.0};

    Banks banks = build_banks(block0, half_span, fe, cfg);
    CVec x, e;
    double energy = eval_tied(banks.z, wbar, pilots, x, e);
    if (!std::isfinite(energy))
        throw degenerate_error("estimate_fiducial_offset: degenerate start");

    EstimatorResult result;
    result.initial_mse = energy;
    result.initial_fe = fe;
    double mu_fe = ecfg.mu_fe;  // < 0: calibrate on first nonzero gamma

    for (int iter = 1; iter <= ecfg.max_outer; ++iter) {
        const double energy_before = energy;

        if (energy <= ecfg.converge_floor) {
            result.mse_trace.push_back(energy);
            result.fe_trace.push_back(fe);
            result.iterations = iter;
            break;
        }

        // (a) backtracked Eq.-(22) steps on the shared combiner, scaled to
        // the Gauss-Newton order E/||g||^2
        energy = tied_weight_descent(banks.z, pilots, ecfg, ecfg.max_inner,
                                     wbar, x, e, energy);

        // (b) gradient steps on f_e. Each trial re-adapts the combiner for
        // a few steps before judging: after (a) the state sits at a
        // conditional optimum, where a raw f_e move alone rarely improves
        // E even inside the basin.
        if (ecfg.mu_fe != 0.0) {
            for (int j = 0; j < ecfg.max_inner; ++j) {
                const double gamma =
                    tied_gamma(banks.zt, wbar, pilots, half_span, x, e);
                if (gamma == 0.0) break;
                if (mu_fe < 0) mu_fe = 0.02 * df / std::abs(gamma);
                const double delta_fe =
                    std::clamp(mu_fe * gamma, -step_cap, step_cap);

                const double before = energy;
                bool accepted = false;
                double s = 1.0;
                for (int bt = 0; bt < 9; ++bt) {
                    const double fe_trial =
                        std::clamp(fe + s * delta_fe, fe_lo, fe_hi);
                    if (fe_trial == fe) break;
                    Banks trial = build_banks(block0, half_span, fe_trial, cfg);
                    CVec wt_ = wbar;
                    CVec xt_, et_;
                    double et = eval_tied(trial.z, wt_, pilots, xt_, et_);
                    if (std::isfinite(et))
                        et = tied_weight_descent(trial.z, pilots, ecfg, 6, wt_,
                                                 xt_, et_, et);
                    if (et <= energy) {
                        banks = std::move(trial);
                        fe = fe_trial;
                        wbar = std::move(wt_);
                        x = std::move(xt_);
                        e = std::move(et_);
                        energy = et;
                        accepted = true;
                        break;
                    }
                    s *= 0.5;
                }
                if (!accepted) break;
                if (before - energy <
                    ecfg.inner_stall_rel * std::max(before, 1e-300))
                    break;
            }
        }

        result.mse_trace.push_back(energy);
        result.fe_trace.push_back(fe);
        result.iterations = iter;

        if (!std::isfinite(energy) || energy > result.initial_mse * 100.0 + 1e-300)
            throw divergence_error("estimator diverged", result.mse_trace);

        if (energy <= ecfg.converge_floor) break;
        if (energy_before <= 0.0) break;
        if (10.0 * std::abs(std::log10(energy_before / energy)) < ecfg.eta_db)
            break;
    }

    result.fe_hat = fe;
    if (ecfg.fe_band_reference && ecfg.mu_fe != 0.0) {
        const double pilot_center =
            cfg.lowest_carrier_hz() + 0.5 * (1.0 + P) * df;
        result.fe_hat =
            std::clamp(fe * cfg.center_freq_hz / pilot_center, fe_lo, fe_hi);
    }
    result.pilot_weights.carriers = P + 1;
    result.pilot_weights.taps = M;
    result.pilot_weights.w.resize(static_cast<std::size_t>(P + 1) * M);
    for (int k = 0; k <= P; ++k)
        std::copy(wbar.begin(), wbar.end(), result.pilot_weights.row(k).begin());
    return result;
}

WeightSet train_pilot_weights(const DemodBank& bank, std::span<const cplx> pilots,
                              const EstimatorConfig& ecfg) {
    const int P = static_cast<int>(pilots.size());
    if (P < 1) throw shape_error("train_pilot_weights: need pilots");
    if (P + 1 > bank.carriers)
        throw shape_error("train_pilot_weights: pilot set exceeds bank");

    // One combiner shared across the pilot band. Untied per-pilot training
    // can fit the pilot chain at any bank geometry and generalizes poorly;
    // the shared combiner only improves by actually compensating ICI.
    CVec wbar(WeightSet::initial_for(bank.kind, 1, bank.columns).w);
    CVec x, e;
    double energy = eval_tied(bank, wbar, pilots, x, e);
    if (!std::isfinite(energy))
        throw degenerate_error("train_pilot_weights: degenerate start");
    tied_weight_descent(bank, pilots, ecfg, ecfg.max_inner, wbar, x, e, energy);

    WeightSet w;
    w.carriers = P + 1;
    w.taps = bank.columns;
    w.w.resize(static_cast<std::size_t>(P + 1) * bank.columns);
    for (int k = 0; k <= P; ++k)
        std::copy(wbar.begin(), wbar.end(), w.row(k).begin());
    return w;
}

double adapted_pilot_mse(const ComplexBlock& block0, std::span<const cplx> pilots,
                         int half_span, const OfdmConfig& cfg,
                         const EstimatorConfig& ecfg, double fe_hz) {
    EstimatorConfig frozen = ecfg;
    frozen.mu_fe = 0.0;
    frozen.fe_init_hz = fe_hz;
    const EstimatorResult r =
        estimate_fiducial_offset(block0, pilots, half_span, cfg, frozen);
    return r.mse_trace.empty() ? r.initial_mse : r.mse_trace.back();
}

FrameAdaptResult adapt_weights_frame(const std::vector<DemodBank>& banks,
                                     std::span<const cplx> pilots,
                                     const OfdmConfig& cfg,
                                     const EstimatorConfig& ecfg) {
    if (banks.empty()) throw shape_error("adapt_weights_frame: no banks");
    const int K = cfg.carrier_count;
    const int M = banks.front().columns;
    const int P = static_cast<int>(pilots.size());
    if (P < 1) throw shape_error("adapt_weights_frame: pilots required");

    FrameAdaptResult out;
    out.weights = WeightSet::initial_for(banks.front().kind, K, M);

    // error_threshold = 0 freezes the combiner entirely.
    const bool frozen = ecfg.error_threshold <= 0.0;

    // Reference weight for carrier 0 (never adapted past training).
    CVec w0(WeightSet::initial_for(banks.front().kind, 1, M).w);

    if (!frozen) {
        // Pilot training on block 0, shared with the offset estimator.
        // The trained combiner seeds carriers 0..P so no block has to
        // re-acquire from scratch; per-carrier tracking refines from
        // there.
        const WeightSet trained = train_pilot_weights(banks.front(), pilots, ecfg);
        const auto row0 = trained.row(0);
        std::copy(row0.begin(), row0.end(), w0.begin());
        for (int k = 1; k <= P; ++k) {
            const auto src = trained.row(k);
            std::copy(src.begin(), src.end(), out.weights.row(k).begin());
        }
    }

    out.detected.resize(banks.size());
    for (std::size_t b = 0; b < banks.size(); ++b) {
        const DemodBank& bank = banks[b];
        if (bank.carriers != K || bank.columns != M)
            throw shape_error("adapt_weights_frame: bank shape mismatch");
        CVec& bhat = out.detected[b];
        bhat.resize(K - 1);

        cplx x_prev = dot_wh_z(w0, bank.row(0));
        for (int k = 1; k < K; ++k) {
            // Beyond the trained pilot rows, block 0 seeds each carrier
            // from its predecessor (carrier-to-carrier carry); later
            // blocks start from the same carrier's weight of the previous
            // block (block-to-block carry).
            const auto wk = out.weights.row(k);
            if (b == 0 && k > P) {
                const auto prev = out.weights.row(k - 1);
                std::copy(prev.begin(), prev.end(), wk.begin());
            }

            const auto z = bank.row(k);
            const cplx x = dot_wh_z(wk, z);
            if (x_prev == cplx{0.0, 0.0})
                throw degenerate_error("adapt_weights_frame: zero reference at carrier " +
                                       std::to_string(k - 1));
            const cplx detected = x / x_prev;
            bhat[k - 1] = detected;

            const bool is_pilot = (b == 0 && k <= P);
            const cplx ref = is_pilot ? pilots[k - 1]
                                      : slice_psk_one(detected, cfg.psk_order);
            const cplx err = ref - detected;

            if (!frozen && std::abs(err) <= ecfg.error_threshold) {
                // Target-normalized LMS along the Eq.-(21) direction:
                // scaling g by |x_{k-1}|^2/(||z||^2 + eps) makes the error
                // contraction independent of the carrier gain.
                double znorm = ecfg.nlms_eps;
                for (const cplx& zz : z) znorm += std::norm(zz);
                const cplx c = ecfg.mu_w * std::conj(err) * std::conj(x_prev) /
                               (ecfg.gradient_scaling ? znorm : 1.0);
                for (int a = 0; a < M; ++a) wk[a] += c * z[a];
                ++out.updates_applied;
            } else if (!frozen) {
                ++out.updates_skipped;
            }

            x_prev = x;
        }
    }
    return out;
}

}  // namespace icilab
