// Benchmark comparing the FFT-based kernels against the serial
// direct-summation reference, and parallel against single-thread runs.

#include "icilab/channel.hpp"
#include "icilab/demod_bank.hpp"
#include "icilab/harness.hpp"
#include "icilab/rng.hpp"

#include "reference/ref_dsp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace icilab;

namespace {

double seconds_for(int repeats, const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count() / repeats;
}

ComplexBlock random_block(const OfdmConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ComplexBlock block;
    block.samples.resize(cfg.samples_per_block());
    block.dt = 1.0 / cfg.sample_rate_hz;
    for (auto& s : block.samples) {
        double g0, g1;
        gaussian_pair(rng, g0, g1);
        s = cplx{g0, g1};
    }
    return block;
}

void bench_bank(int carriers) {
    OfdmConfig cfg;
    cfg.carrier_count = carriers;
    const ComplexBlock block = random_block(cfg, 42);
    const double fe = 1.3 * cfg.carrier_spacing_hz();

    DemodBank fast, slow;
    const double t_fast =
        seconds_for(carriers >= 1024 ? 5 : 20,
                    [&] { fast = fractional_bank(block, 1, fe, cfg); });
    const double t_slow = seconds_for(
        1, [&] { slow = ref::direct_fractional_bank(block, 1, fe, cfg); });

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fast.values.size(); ++i) {
        num += std::norm(fast.values[i] - slow.values[i]);
        den += std::norm(slow.values[i]);
    }
    std::printf("bank K=%-5d  fft %9.3f ms   direct %9.3f ms   speedup %7.1fx"
                "   rel err %.2e\n",
                carriers, t_fast * 1e3, t_slow * 1e3, t_slow / t_fast,
                std::sqrt(num / den));
}

void bench_channel(int carriers) {
    OfdmConfig cfg;
    cfg.carrier_count = carriers;
    cfg.block_count = 8192 / carriers;
    std::mt19937_64 rng(7);
    CVec frame(cfg.samples_per_frame());
    for (auto& s : frame) {
        double g0, g1;
        gaussian_pair(rng, g0, g1);
        s = cplx{g0, g1};
    }
    ChannelSpec chan = ChannelSpec::default_three_path();
    chan.doppler_factor = 2.5e-4;

#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    const double t1 = seconds_for(3, [&] { (void)apply_channel(frame, chan, cfg); });
#ifdef _OPENMP
    omp_set_num_threads(max_threads);
#endif
    const double tn = seconds_for(3, [&] { (void)apply_channel(frame, chan, cfg); });
    std::printf("channel K=%-4d N=%-3d  1 thread %8.1f ms   all threads %8.1f ms"
                "   speedup %5.2fx\n",
                carriers, cfg.block_count, t1 * 1e3, tn * 1e3, t1 / tn);
}

void bench_experiment() {
    ExperimentSpec spec;
    spec.cfg.carrier_count = 256;
    spec.cfg.block_count = 4;
    spec.channel.doppler_factor = 2e-4;
    spec.axis = SweepAxis::Snr;
    spec.values = {20.0, 30.0};
    spec.seeds = {1, 2, 3, 4};
    spec.receivers = {ReceiverKind::FFFT, ReceiverKind::AFFT};

    spec.threads = 1;
    const double t1 = seconds_for(1, [&] { (void)run_experiment(spec); });
    spec.threads = 0;
    const double tn = seconds_for(1, [&] { (void)run_experiment(spec); });
    std::printf("experiment 8 cells   1 thread %8.1f ms   all threads %8.1f ms"
                "   speedup %5.2fx\n",
                t1 * 1e3, tn * 1e3, t1 / tn);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("OpenMP: disabled\n");
#endif
    bench_bank(256);
    bench_bank(1024);
    bench_channel(256);
    bench_channel(1024);
    bench_experiment();
    return 0;
}
