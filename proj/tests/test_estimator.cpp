#include "icilab/estimator.hpp"

#include "icilab/channel.hpp"
#include "icilab/rxfront.hpp"
#include "icilab/signal_model.hpp"
#include "icilab/txchain.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <numbers>

using namespace icilab;

namespace {

struct Instance {
    OfdmConfig cfg;
    ComplexBlock block;
    CVec pilots;
    WeightSet weights;
    double fe;
    int a_span = 1;
};

// Random composite-MSE instance: noise block, random unit pilots, weights
// perturbed off the impulse so the f_e dependence is alive.
Instance random_instance(std::mt19937_64& rng, int carriers = 64, int p = 6) {
    Instance inst;
    inst.cfg = test::small_config(carriers);
    inst.block = test::random_block(rng, inst.cfg);
    inst.pilots = test::random_unit_symbols(rng, p);
    inst.weights = WeightSet::impulse(p + 1, 3);
    for (auto& v : inst.weights.w) {
        double g0, g1;
        gaussian_pair(rng, g0, g1);
        v += 0.3 * cplx{g0, g1};
    }
    inst.fe = (0.8 + 0.8 * uniform_unit(rng)) * inst.cfg.carrier_spacing_hz();
    return inst;
}

// Smallest |x_k| across the pilot chain, for the exclusion rule.
double min_chain_magnitude(const Instance& inst) {
    const DemodBank bank =
        fractional_bank(inst.block, inst.a_span, inst.fe, inst.cfg);
    double lo = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= static_cast<int>(inst.pilots.size()); ++k)
        lo = std::min(lo, std::abs(dot_wh_z(inst.weights.row(k), bank.row(k))));
    return lo;
}

}  // namespace

TEST_CASE("composite mse basics") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(51);

    SUBCASE("clean loopback with impulse weights is at the floor") {
        const CVec b = test::random_unit_symbols(rng, cfg.carrier_count - 1);
        const CVec d = differential_encode(b, cfg.reference_symbol);
        const ComplexBlock block = modulate_block(d, cfg);
        const int p = 8;
        const CVec pilots(b.begin(), b.begin() + p);
        const WeightSet w = WeightSet::impulse(p + 1, 3);
        for (double mult : {1.0, 1.7}) {
            const double e = composite_mse(block, pilots, w,
                                           mult * cfg.carrier_spacing_hz(), 1, cfg);
            CHECK(e <= 1e-12);
        }
    }

    SUBCASE("antipodal single pilot gives E = 4") {
        // d = (1, -1): detection returns -1 while the pilot says +1.
        CVec d(cfg.carrier_count, cplx{0.0, 0.0});
        d[0] = cplx{1.0, 0.0};
        d[1] = cplx{-1.0, 0.0};
        const ComplexBlock block = modulate_block(d, cfg);
        const CVec pilots = {cplx{1.0, 0.0}};
        const WeightSet w = WeightSet::impulse(2, 3);
        const double e =
            composite_mse(block, pilots, w, cfg.carrier_spacing_hz(), 1, cfg);
        CHECK(e == doctest::Approx(4.0).epsilon(1e-9));
    }
}

TEST_CASE("f_e gradient trivial cases") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(52);

    SUBCASE("A = 0 has no f_e dependence") {
        const ComplexBlock block = test::random_block(rng, cfg);
        const CVec pilots = test::random_unit_symbols(rng, 4);
        const WeightSet w = WeightSet::impulse(5, 1);
        CHECK(grad_fe(block, pilots, w, cfg.carrier_spacing_hz(), 0, cfg) == 0.0);
    }

    SUBCASE("zero error means zero gradient") {
        const CVec b = test::random_unit_symbols(rng, cfg.carrier_count - 1);
        const ComplexBlock block =
            modulate_block(differential_encode(b, cfg.reference_symbol), cfg);
        const CVec pilots(b.begin(), b.begin() + 6);
        const WeightSet w = WeightSet::impulse(7, 3);
        CHECK(std::abs(grad_fe(block, pilots, w, cfg.carrier_spacing_hz(), 1,
                               cfg)) < 1e-9);
    }
}

TEST_CASE("f_e gradient matches central finite differences") {
    auto rng = test::rng_for(53);
    const double prefactor = -4.0 * std::numbers::pi / 2.0;  // -(4 pi)/(A+1), A=1

    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 20; ++trial) {
        const Instance inst = random_instance(rng);
        if (min_chain_magnitude(inst) < 1e-3) continue;

        const double gamma = grad_fe(inst.block, inst.pilots, inst.weights,
                                     inst.fe, inst.a_span, inst.cfg);
        const double h = 1e-4 * inst.cfg.carrier_spacing_hz();
        const double ep = composite_mse(inst.block, inst.pilots, inst.weights,
                                        inst.fe + h, inst.a_span, inst.cfg);
        const double em = composite_mse(inst.block, inst.pilots, inst.weights,
                                        inst.fe - h, inst.a_span, inst.cfg);
        const double fd = (ep - em) / (2.0 * h);
        CHECK(std::abs(prefactor * gamma - fd) <= 1e-3 * std::abs(fd));
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("weight gradient") {
    auto rng = test::rng_for(54);

    SUBCASE("stationary at zero error") {
        OfdmConfig cfg = test::small_config();
        const CVec b = test::random_unit_symbols(rng, cfg.carrier_count - 1);
        const ComplexBlock block =
            modulate_block(differential_encode(b, cfg.reference_symbol), cfg);
        const CVec pilots(b.begin(), b.begin() + 6);
        const WeightSet w = WeightSet::impulse(7, 3);
        const CVec g = grad_w(block, pilots, w, cfg.carrier_spacing_hz(), 1, cfg, 3);
        for (const cplx& v : g) CHECK(std::abs(v) < 1e-9);
    }

    SUBCASE("single pilot drops the look-ahead term") {
        const Instance inst = random_instance(rng, 64, 1);
        const DemodBank bank =
            fractional_bank(inst.block, inst.a_span, inst.fe, inst.cfg);
        const cplx x0 = dot_wh_z(inst.weights.row(0), bank.row(0));
        const cplx x1 = dot_wh_z(inst.weights.row(1), bank.row(1));
        const cplx e1 = inst.pilots[0] - x1 / x0;

        const CVec g = grad_w(inst.block, inst.pilots, inst.weights, inst.fe,
                              inst.a_span, inst.cfg, 1);
        for (int a = 0; a < 3; ++a) {
            const cplx expect = bank.at(1, a) * std::conj(e1) / x0;
            CHECK(std::abs(g[a] - expect) < 1e-12);
        }
    }

    SUBCASE("matches real/imag finite differences") {
        int checked = 0;
        for (int trial = 0; trial < 40 && checked < 10; ++trial) {
            Instance inst = random_instance(rng);
            if (min_chain_magnitude(inst) < 1e-3) continue;

            const int p = 3;
            const CVec g = grad_w(inst.block, inst.pilots, inst.weights, inst.fe,
                                  inst.a_span, inst.cfg, p);
            const double h = 1e-6;
            for (int a = 0; a < 3; ++a) {
                for (int part = 0; part < 2; ++part) {
                    WeightSet wp = inst.weights, wm = inst.weights;
                    const cplx delta = part == 0 ? cplx{h, 0.0} : cplx{0.0, h};
                    wp.row(p)[a] += delta;
                    wm.row(p)[a] -= delta;
                    const double ep = composite_mse(inst.block, inst.pilots, wp,
                                                    inst.fe, inst.a_span, inst.cfg);
                    const double em = composite_mse(inst.block, inst.pilots, wm,
                                                    inst.fe, inst.a_span, inst.cfg);
                    const double fd = (ep - em) / (2.0 * h);
                    const double analytic =
                        part == 0 ? -2.0 * g[a].real() : -2.0 * g[a].imag();
                    CHECK(std::abs(fd - analytic) <=
                          1e-3 * std::max(std::abs(fd), 1e-6));
                }
            }
            ++checked;
        }
        CHECK(checked == 10);
    }
}

TEST_CASE("descent direction of the f_e gradient") {
    auto rng = test::rng_for(55);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 10; ++trial) {
        const Instance inst = random_instance(rng);
        if (min_chain_magnitude(inst) < 1e-3) continue;
        const double gamma = grad_fe(inst.block, inst.pilots, inst.weights,
                                     inst.fe, inst.a_span, inst.cfg);
        if (std::abs(gamma) < 1e-9) continue;

        const double e0 = composite_mse(inst.block, inst.pilots, inst.weights,
                                        inst.fe, inst.a_span, inst.cfg);
        const double df = inst.cfg.carrier_spacing_hz();
        for (double frac : {1e-3, 1e-2}) {
            const double mu = frac * df / std::abs(gamma);
            const double e1 = composite_mse(inst.block, inst.pilots, inst.weights,
                                            inst.fe + mu * gamma, inst.a_span,
                                            inst.cfg);
            CHECK(e1 < e0);
        }
        ++checked;
    }
    CHECK(checked >= 8);
}

namespace {

struct DopplerFrame {
    OfdmConfig cfg;
    ReceivedFrame frame;
    CVec pilots;
    std::vector<CVec> btrue;
};

DopplerFrame doppler_frame(std::uint64_t seed, double alpha, double snr_db,
                           ChannelSpec spec = test::short_delay_channel(),
                           int carriers = 64, int blocks = 2) {
    DopplerFrame out;
    out.cfg = test::small_config(carriers, blocks);
    auto rng = test::rng_for(seed);
    std::vector<CVec> encoded;
    for (int b = 0; b < blocks; ++b) {
        out.btrue.push_back(test::random_psk_symbols(rng, carriers - 1));
        encoded.push_back(
            differential_encode(out.btrue.back(), out.cfg.reference_symbol));
    }
    const Frame frame = build_frame(encoded, out.cfg);

    spec.doppler_factor = alpha;
    CVec rx = apply_channel(frame.baseband, spec, out.cfg);
    rx = add_noise(rx, snr_db, seed ^ 0xBEEF);

    FrontEndOptions opts;
    opts.timing_alpha = alpha;
    opts.true_alpha = alpha;
    out.frame = front_end(rx, out.cfg, opts);
    out.pilots.assign(out.btrue[0].begin(),
                      out.btrue[0].begin() + out.cfg.pilot_count);
    return out;
}

ChannelSpec unit_path() {
    ChannelSpec spec;
    spec.paths = {{cplx{1.0, 0.0}, 0.0, 0.0}};
    return spec;
}

}  // namespace

TEST_CASE("estimator on a clean zero-doppler channel stops immediately") {
    const DopplerFrame df = doppler_frame(
        61, 0.0, std::numeric_limits<double>::infinity(), unit_path());
    const EstimatorResult r = estimate_fiducial_offset(
        df.frame.blocks.front(), df.pilots, 1, df.cfg, {});
    CHECK(r.iterations <= 2);
    CHECK(r.mse_trace.back() <= 1e-10);
}

TEST_CASE("estimator finds the basin below the carrier-spacing value") {
    // Desk-scale variant of the fiducial-offset landscape: the offset at
    // the band center sits at two thirds of the carrier spacing.
    const double alpha = 0.66 * 187.5 / 32000.0;
    const DopplerFrame df = doppler_frame(62, alpha, 30.0);

    EstimatorConfig ecfg;
    const EstimatorResult r = estimate_fiducial_offset(
        df.frame.blocks.front(), df.pilots, 1, df.cfg, ecfg);
    const double spacing = df.cfg.carrier_spacing_hz();

    // Compare at the estimator's own (pilot-referenced) endpoint.
    const double e_hat = adapted_pilot_mse(df.frame.blocks.front(), df.pilots, 1,
                                           df.cfg, ecfg, r.fe_trace.back());
    const double e_spacing = adapted_pilot_mse(df.frame.blocks.front(),
                                               df.pilots, 1, df.cfg, ecfg,
                                               spacing);
    CHECK(e_hat < e_spacing);
    CHECK(r.fe_trace.back() != r.initial_fe);
}

TEST_CASE("estimator endpoint is within 5 percent of a dense grid") {
    const double alpha = 0.66 * 187.5 / 32000.0;
    const DopplerFrame df = doppler_frame(63, alpha, 30.0);
    EstimatorConfig ecfg;

    const EstimatorResult r = estimate_fiducial_offset(
        df.frame.blocks.front(), df.pilots, 1, df.cfg, ecfg);
    const double e_hat = adapted_pilot_mse(df.frame.blocks.front(), df.pilots, 1,
                                           df.cfg, ecfg, r.fe_trace.back());

    const double spacing = df.cfg.carrier_spacing_hz();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 200; ++i) {
        const double fe = (0.2 + 2.3 * i / 199.0) * spacing;
        best = std::min(best, adapted_pilot_mse(df.frame.blocks.front(),
                                                df.pilots, 1, df.cfg, ecfg, fe));
    }
    CHECK(e_hat <= 1.05 * best);
}

TEST_CASE("estimator trace is monotone and never diverges") {
    auto rng = test::rng_for(64);
    for (int trial = 0; trial < 6; ++trial) {
        const double alpha = 5e-4 + 1.5e-3 * uniform_unit(rng);
        const double snr = 15.0 + 20.0 * uniform_unit(rng);
        const DopplerFrame df = doppler_frame(100 + trial, alpha, snr);
        const EstimatorResult r = estimate_fiducial_offset(
            df.frame.blocks.front(), df.pilots, 1, df.cfg, {});
        double prev = r.initial_mse;
        for (double e : r.mse_trace) {
            CHECK(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
        CHECK(r.mse_trace.back() <= r.initial_mse * 100.0);
    }
}

TEST_CASE("frame weight adaptation") {
    SUBCASE("clean loopback leaves the weights at the impulse") {
        const DopplerFrame df = doppler_frame(
            65, 0.0, std::numeric_limits<double>::infinity(), unit_path());
        std::vector<DemodBank> banks;
        for (const auto& blk : df.frame.blocks)
            banks.push_back(
                fractional_bank(blk, 1, df.cfg.carrier_spacing_hz(), df.cfg));
        const FrameAdaptResult r =
            adapt_weights_frame(banks, df.pilots, df.cfg, {});
        const WeightSet impulse =
            WeightSet::impulse(df.cfg.carrier_count, 3);
        double worst = 0.0;
        for (std::size_t i = 0; i < r.weights.w.size(); ++i)
            worst = std::max(worst, std::abs(r.weights.w[i] - impulse.w[i]));
        CHECK(worst <= 1e-3);
    }

    SUBCASE("zero error threshold freezes the combiner") {
        const DopplerFrame df = doppler_frame(66, 1e-3, 20.0);
        std::vector<DemodBank> banks;
        for (const auto& blk : df.frame.blocks)
            banks.push_back(
                fractional_bank(blk, 1, df.cfg.carrier_spacing_hz(), df.cfg));
        EstimatorConfig ecfg;
        ecfg.error_threshold = 0.0;
        const FrameAdaptResult r =
            adapt_weights_frame(banks, df.pilots, df.cfg, ecfg);
        CHECK(r.updates_applied == 0);
        const WeightSet impulse = WeightSet::impulse(df.cfg.carrier_count, 3);
        CHECK(r.weights.w == impulse.w);
    }

    SUBCASE("adaptation beats frozen weights under doppler") {
        const double alpha = 0.5 * 187.5 / 32000.0;
        const DopplerFrame df = doppler_frame(67, alpha, 30.0);
        std::vector<DemodBank> banks;
        for (const auto& blk : df.frame.blocks)
            banks.push_back(
                fractional_bank(blk, 1, df.cfg.carrier_spacing_hz(), df.cfg));

        EstimatorConfig adapt_on;
        EstimatorConfig frozen;
        frozen.error_threshold = 0.0;
        const FrameAdaptResult live =
            adapt_weights_frame(banks, df.pilots, df.cfg, adapt_on);
        const FrameAdaptResult dead =
            adapt_weights_frame(banks, df.pilots, df.cfg, frozen);

        auto mse = [&](const FrameAdaptResult& r) {
            double acc = 0.0;
            std::size_t n = 0;
            for (std::size_t b = 0; b < r.detected.size(); ++b)
                for (std::size_t i = (b == 0 ? df.pilots.size() : 0);
                     i < r.detected[b].size(); ++i) {
                    acc += std::norm(df.btrue[b][i] - r.detected[b][i]);
                    ++n;
                }
            return acc / static_cast<double>(n);
        };
        CHECK(mse(live) < mse(dead));
    }
}
