#include "icilab/fft.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <numbers>

using namespace icilab;

namespace {

// O(n^2) DFT for cross-checking.
CVec naive_dft(const CVec& x, bool inverse) {
    const auto n = x.size();
    CVec out(n, cplx{0.0, 0.0});
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t k = 0; k < n; ++k)
            out[m] += x[k] * std::polar(1.0, sign * 2.0 * std::numbers::pi *
                                                 static_cast<double>(m * k) /
                                                 static_cast<double>(n));
    return out;
}

}  // namespace

TEST_CASE("fft matches naive dft") {
    auto rng = test::rng_for(1);
    for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
        const CVec x = test::random_gaussian(rng, n);
        const CVec fast = dsp::fft(x);
        const CVec slow = naive_dft(x, false);
        CHECK(test::rel_error(fast, slow) < 1e-10);

        const CVec fast_inv = dsp::fft(x, true);
        const CVec slow_inv = naive_dft(x, true);
        CHECK(test::rel_error(fast_inv, slow_inv) < 1e-10);
    }
}

TEST_CASE("fft inverse round trip") {
    auto rng = test::rng_for(2);
    const CVec x = test::random_gaussian(rng, 1024);
    CVec y = dsp::fft(x);
    y = dsp::fft(y, true);
    for (auto& v : y) v /= 1024.0;
    CHECK(test::max_abs_diff(x, y) < 1e-12);
}

TEST_CASE("fft rejects non power of two") {
    CVec x(12);
    CHECK_THROWS_AS(dsp::fft(x), shape_error);
}
