#include "icilab/demod_bank.hpp"

#include "icilab/txchain.hpp"
#include "test_helpers.hpp"

#include "reference/ref_dsp.hpp"

#include <doctest.h>

#include <numbers>

using namespace icilab;

namespace {

ComplexBlock tone_block(const OfdmConfig& cfg, double freq_hz) {
    ComplexBlock block;
    block.samples.resize(cfg.samples_per_block());
    block.dt = 1.0 / cfg.sample_rate_hz;
    const double step = 2.0 * std::numbers::pi * freq_hz / cfg.sample_rate_hz;
    for (std::size_t n = 0; n < block.samples.size(); ++n)
        block.samples[n] = std::polar(1.0, step * static_cast<double>(n));
    return block;
}

// Closed-form (1/N) sum of e^{j 2 pi f n / f_s} over one block.
cplx dirichlet(const OfdmConfig& cfg, double freq_hz) {
    const int n = cfg.samples_per_block();
    const double w = 2.0 * std::numbers::pi * freq_hz / cfg.sample_rate_hz;
    if (std::abs(w) < 1e-15) return cplx{1.0, 0.0};
    const cplx num = 1.0 - std::polar(1.0, w * n);
    const cplx den = 1.0 - std::polar(1.0, w);
    return num / den / static_cast<double>(n);
}

}  // namespace

TEST_CASE("conv_fft loopback and oracle") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(41);

    SUBCASE("clean loopback returns symbols at unit scale") {
        const CVec d = test::random_unit_symbols(rng, cfg.carrier_count);
        CHECK(test::max_abs_diff(conv_fft(modulate_block(d, cfg), cfg), d) < 1e-9);
    }

    SUBCASE("random block matches direct summation") {
        const ComplexBlock block = test::random_block(rng, cfg);
        CHECK(test::rel_error(conv_fft(block, cfg),
                              ref::direct_conv_fft(block, cfg)) < 1e-9);
    }

    SUBCASE("half-bin tone splits evenly between neighbors") {
        const int k = 20;
        const ComplexBlock block =
            tone_block(cfg, (k + 0.5) * cfg.carrier_spacing_hz());
        const CVec z = conv_fft(block, cfg);
        CHECK(std::abs(std::abs(z[k]) - std::abs(z[k + 1])) < 1e-12);
        // and the levels follow the Dirichlet kernel
        const cplx expect = dirichlet(cfg, 0.5 * cfg.carrier_spacing_hz());
        CHECK(std::abs(std::abs(z[k]) - std::abs(expect)) < 1e-9);
    }

    SUBCASE("length mismatch is rejected") {
        ComplexBlock bad;
        bad.samples.resize(cfg.samples_per_block() / 2);
        CHECK_THROWS_AS(conv_fft(bad, cfg), shape_error);
    }
}

TEST_CASE("fractional bank") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(42);
    const double df = cfg.carrier_spacing_hz();

    SUBCASE("degenerate A=0 equals conv_fft") {
        const ComplexBlock block = test::random_block(rng, cfg);
        const DemodBank bank = fractional_bank(block, 0, df, cfg);
        const CVec z = conv_fft(block, cfg);
        REQUIRE(bank.columns == 1);
        for (int k = 0; k < cfg.carrier_count; ++k)
            CHECK(bank.at(k, 0) == z[k]);
    }

    SUBCASE("center column is bit-identical to conv_fft") {
        const ComplexBlock block = test::random_block(rng, cfg);
        const DemodBank bank = fractional_bank(block, 1, 1.4 * df, cfg);
        const CVec z = conv_fft(block, cfg);
        for (int k = 0; k < cfg.carrier_count; ++k)
            CHECK(bank.at_shift(k, 0) == z[k]);
    }

    SUBCASE("matches direct summation at several offsets") {
        const ComplexBlock block = test::random_block(rng, cfg);
        for (double mult : {0.7, 1.0, 1.9}) {
            const DemodBank fast = fractional_bank(block, 1, mult * df, cfg);
            const DemodBank slow =
                ref::direct_fractional_bank(block, 1, mult * df, cfg);
            CHECK(test::rel_error(fast.values, slow.values) < 1e-9);
        }
    }

    SUBCASE("clean loopback half-bin columns follow the kernel") {
        const CVec d = test::random_unit_symbols(rng, cfg.carrier_count);
        const ComplexBlock block = modulate_block(d, cfg);
        const DemodBank bank = fractional_bank(block, 1, df, cfg);
        const DemodBank slow = ref::direct_fractional_bank(block, 1, df, cfg);
        CHECK(test::rel_error(bank.values, slow.values) < 1e-9);
        for (int k = 0; k < cfg.carrier_count; ++k)
            CHECK(std::abs(bank.at_shift(k, 0) - d[k]) < 1e-9);
    }

    SUBCASE("kind tags") {
        const ComplexBlock block = test::random_block(rng, cfg);
        CHECK(fractional_bank(block, 1, df, cfg).kind == BankKind::Fractional);
        CHECK(fractional_bank(block, 1, 1.3 * df, cfg).kind == BankKind::Adaptive);
    }

    SUBCASE("nonpositive f_e is rejected") {
        const ComplexBlock block = test::random_block(rng, cfg);
        CHECK_THROWS_AS(fractional_bank(block, 1, 0.0, cfg), config_error);
    }
}

TEST_CASE("time-weighted bank") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(43);
    const double df = cfg.carrier_spacing_hz();

    SUBCASE("zero input gives zeros") {
        ComplexBlock block;
        block.samples.assign(cfg.samples_per_block(), cplx{0.0, 0.0});
        block.dt = 1.0 / cfg.sample_rate_hz;
        const DemodBank bank = time_weighted_bank(block, 1, df, cfg);
        for (const cplx& v : bank.values) CHECK(std::abs(v) == 0.0);
    }

    SUBCASE("constant input at k=0,a=0 is the discrete mean of t") {
        ComplexBlock block;
        block.samples.assign(cfg.samples_per_block(), cplx{1.0, 0.0});
        block.dt = 1.0 / cfg.sample_rate_hz;
        const DemodBank bank = time_weighted_bank(block, 1, df, cfg);
        const double expect = (cfg.samples_per_block() - 1) /
                              (2.0 * cfg.sample_rate_hz);
        CHECK(std::abs(bank.at_shift(0, 0) - cplx{expect, 0.0}) < 1e-12);
    }

    SUBCASE("matches direct summation") {
        const ComplexBlock block = test::random_block(rng, cfg);
        const DemodBank fast = time_weighted_bank(block, 1, 1.2 * df, cfg);
        const DemodBank slow =
            ref::direct_fractional_bank(block, 1, 1.2 * df, cfg, true);
        CHECK(test::rel_error(fast.values, slow.values) < 1e-9);
    }
}

TEST_CASE("partial bank") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(44);

    SUBCASE("I=1 equals conv_fft") {
        const ComplexBlock block = test::random_block(rng, cfg);
        const DemodBank bank = partial_bank(block, 1, cfg);
        const CVec z = conv_fft(block, cfg);
        for (int k = 0; k < cfg.carrier_count; ++k)
            CHECK(std::abs(bank.at(k, 0) - z[k]) < 1e-12);
    }

    SUBCASE("segments sum to the full output") {
        const ComplexBlock block = test::random_block(rng, cfg);
        const DemodBank bank = partial_bank(block, 3, cfg);
        const CVec z = conv_fft(block, cfg);
        for (int k = 0; k < cfg.carrier_count; ++k) {
            cplx sum{0.0, 0.0};
            for (int i = 0; i < 3; ++i) sum += bank.at(k, i);
            CHECK(std::abs(sum - z[k]) < 1e-9);
        }
    }

    SUBCASE("clean loopback with uniform weights recovers symbols") {
        const CVec d = test::random_unit_symbols(rng, cfg.carrier_count);
        const DemodBank bank = partial_bank(modulate_block(d, cfg), 3, cfg);
        const CVec x = combine(bank, WeightSet::uniform(cfg.carrier_count, 3));
        CHECK(test::max_abs_diff(x, d) < 1e-9);
    }

    SUBCASE("matches direct summation") {
        const ComplexBlock block = test::random_block(rng, cfg);
        const DemodBank fast = partial_bank(block, 3, cfg);
        const DemodBank slow = ref::direct_partial_bank(block, 3, cfg);
        CHECK(test::rel_error(fast.values, slow.values) < 1e-9);
    }
}

TEST_CASE("combine") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(45);
    const ComplexBlock block = test::random_block(rng, cfg);
    const DemodBank bank =
        fractional_bank(block, 1, 1.1 * cfg.carrier_spacing_hz(), cfg);

    SUBCASE("impulse weights select the center column") {
        const CVec x = combine(bank, WeightSet::impulse(cfg.carrier_count, 3));
        const CVec z = conv_fft(block, cfg);
        CHECK(test::max_abs_diff(x, z) == 0.0);
    }

    SUBCASE("real scaling of weights scales the output") {
        WeightSet w = WeightSet::impulse(cfg.carrier_count, 3);
        const CVec x1 = combine(bank, w);
        for (auto& v : w.w) v *= 2.5;
        const CVec x2 = combine(bank, w);
        for (int k = 0; k < cfg.carrier_count; ++k)
            CHECK(std::abs(x2[k] - 2.5 * x1[k]) < 1e-12);
    }

    SUBCASE("matches a hand-rolled dot product") {
        WeightSet w = WeightSet::impulse(cfg.carrier_count, 3);
        for (auto& v : w.w) {
            double g0, g1;
            gaussian_pair(rng, g0, g1);
            v = cplx{g0, g1};
        }
        const CVec x = combine(bank, w);
        for (int k = 0; k < cfg.carrier_count; k += 7) {
            cplx acc{0.0, 0.0};
            for (int a = 0; a < 3; ++a)
                acc += std::conj(w.row(k)[a]) * bank.at(k, a);
            CHECK(std::abs(x[k] - acc) < 1e-12);
        }
    }

    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(combine(bank, WeightSet::impulse(cfg.carrier_count, 5)),
                        shape_error);
    }
}

TEST_CASE("bank is linear in the input") {
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(46);
    const ComplexBlock bx = test::random_block(rng, cfg);
    const ComplexBlock by = test::random_block(rng, cfg);
    const cplx a{0.3, 0.9}, b{-0.5, 0.2};

    ComplexBlock mix = bx;
    for (std::size_t n = 0; n < mix.samples.size(); ++n)
        mix.samples[n] = a * bx.samples[n] + b * by.samples[n];

    const double fe = 1.6 * cfg.carrier_spacing_hz();
    const DemodBank bank_mix = fractional_bank(mix, 1, fe, cfg);
    const DemodBank bank_x = fractional_bank(bx, 1, fe, cfg);
    const DemodBank bank_y = fractional_bank(by, 1, fe, cfg);

    CVec expect(bank_mix.values.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        expect[i] = a * bank_x.values[i] + b * bank_y.values[i];
    CHECK(test::rel_error(bank_mix.values, expect) < 1e-9);
}

TEST_CASE("frequency-shift theorem on single tones") {
    OfdmConfig cfg = test::small_config();
    const double df = cfg.carrier_spacing_hz();
    const int k = 13;
    const double delta = 0.37 * df;

    // fractional_bank of e^{j 2 pi delta t} v(t): each entry must equal the
    // Dirichlet kernel at the shifted distance.
    const ComplexBlock block = tone_block(cfg, k * df + delta);
    const double fe = 1.2 * df;
    const DemodBank bank = fractional_bank(block, 1, fe, cfg);
    for (int kk = k - 2; kk <= k + 2; ++kk) {
        for (int a = -1; a <= 1; ++a) {
            const double sample_at = kk * df + a * fe / 2.0;
            const cplx expect = dirichlet(cfg, k * df + delta - sample_at);
            CHECK(std::abs(bank.at_shift(kk, a) - expect) < 1e-6);
        }
    }
}

TEST_CASE("compensation range of the fractional grid") {
    // For residual offsets beyond f_e/(2(A+1)) the best shifted column
    // beats the conventional one at the true carrier.
    OfdmConfig cfg = test::small_config();
    const double df = cfg.carrier_spacing_hz();
    const double fe = df;
    const int a_span = 1;
    const int k = 30;

    for (double frac : {0.26, 0.3, 0.35, 0.4, 0.45, 0.5}) {
        for (double sign : {1.0, -1.0}) {
            const double eps = sign * frac * df;
            const ComplexBlock block = tone_block(cfg, k * df + eps);
            const DemodBank bank = fractional_bank(block, a_span, fe, cfg);
            double best = 0.0;
            for (int a = -a_span; a <= a_span; ++a)
                if (a != 0) best = std::max(best, std::abs(bank.at_shift(k, a)));
            CHECK(best > std::abs(bank.at_shift(k, 0)));
        }
    }
}

TEST_CASE("index mapping ties the fractional bank to the shifted outputs") {
    // With A = I-1 and f_e equal to the carrier spacing, the bank entries
    // coincide with the I frequency-shifted outputs: z_{k,a} = y_{k,a} for
    // a >= 0 and z_{k,-a} = y_{k-1,I-a}.
    OfdmConfig cfg = test::small_config();
    auto rng = test::rng_for(47);
    const ComplexBlock block = test::random_block(rng, cfg);
    const int segments = 3;
    const int a_span = segments - 1;

    const DemodBank bank =
        fractional_bank(block, a_span, cfg.carrier_spacing_hz(), cfg);
    const CVec y = ref::direct_shifted_outputs(block, segments, cfg);

    double worst = 0.0;
    double scale = 0.0;
    for (int k = 1; k < cfg.carrier_count; ++k) {
        for (int a = 0; a <= a_span; ++a) {
            const cplx lhs = bank.at_shift(k, a);
            const cplx rhs = y[static_cast<std::size_t>(k) * segments + a];
            worst = std::max(worst, std::abs(lhs - rhs));
            scale = std::max(scale, std::abs(rhs));
        }
        for (int a = 1; a <= a_span; ++a) {
            const cplx lhs = bank.at_shift(k, -a);
            const cplx rhs =
                y[static_cast<std::size_t>(k - 1) * segments + (segments - a)];
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    CHECK(worst < 1e-9 * scale);
}
