#include "icilab/channel.hpp"
#include "icilab/estimator.hpp"
#include "icilab/fft.hpp"
#include "icilab/harness.hpp"
#include "icilab/rng.hpp"
#include "icilab/signal_model.hpp"
#include "icilab/txchain.hpp"

#include "reference/ref_dsp.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

namespace {

using namespace icilab;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path);
    out << text;
}

ExperimentSpec load_spec(const std::string& config_path) {
    if (config_path.empty()) return ExperimentSpec{};  // Table-I defaults
    return parse_config_file(config_path);
}

int cmd_run(const std::string& config_path, const std::string& sweep_override,
            int seeds_override, const std::string& out_dir, int threads,
            bool write_dat, const std::string& dump_frame_path) {
    ExperimentSpec spec = load_spec(config_path);
    if (!sweep_override.empty()) spec.axis = sweep_from_name(sweep_override);
    if (seeds_override > 0) {
        const std::uint64_t base = spec.seeds.empty() ? 1 : spec.seeds.front();
        spec.seeds.clear();
        for (int i = 0; i < seeds_override; ++i)
            spec.seeds.push_back(base + static_cast<std::uint64_t>(i));
    }
    if (threads > 0) spec.threads = threads;
    spec.validate();

    std::filesystem::create_directories(out_dir);

    if (!dump_frame_path.empty()) {
        // Dump the transmitted baseband of the first cell for offline use.
        OfdmConfig cfg = spec.cfg;
        cfg.pilot_count =
            effective_pilot_count(cfg.pilot_count, cfg.carrier_count);
        cfg.validate();
        std::mt19937_64 bit_rng(mix_seed(mix_seed(spec.seeds.front(), 0), 0xB175u));
        std::vector<CVec> encoded(cfg.block_count);
        const int bps = bits_per_symbol(cfg.psk_order);
        for (int b = 0; b < cfg.block_count; ++b) {
            std::vector<std::uint8_t> bits(
                static_cast<std::size_t>(cfg.carrier_count - 1) * bps);
            for (auto& bit : bits) bit = static_cast<std::uint8_t>(bit_rng() & 1u);
            encoded[b] = differential_encode(map_bits_to_psk(bits, cfg.psk_order),
                                             cfg.reference_symbol);
        }
        const Frame frame = build_frame(std::move(encoded), cfg);
        write_frame_dump(dump_frame_path, frame.baseband, cfg);
        std::cout << "frame dump: " << dump_frame_path << "\n";
    }

    const MseReport report = run_experiment(spec);
    const auto summary = summarize(report);

    const std::string report_path = out_dir + "/report.csv";
    const std::string summary_path = out_dir + "/summary.csv";
    write_text(report_path, report_csv(report));
    write_text(summary_path, summary_csv(report.axis, summary));
    if (write_dat) {
        for (ReceiverKind kind : spec.receivers)
            write_text(out_dir + "/sweep_" + receiver_name(kind) + ".dat",
                       summary_dat(summary, kind));
    }

    std::cout << "sweep " << sweep_name(spec.axis) << ": "
              << spec.values.size() << " values x " << spec.seeds.size()
              << " seeds x " << spec.receivers.size() << " receivers -> "
              << report.rows.size() << " rows\n";
    for (const SummaryRow& s : summary) {
        std::printf("  %s=%-10.6g %-9s median %8.2f dB",
                    sweep_name(spec.axis).c_str(), s.value,
                    receiver_name(s.receiver).c_str(), s.median_mse_db);
        if (s.reduction_vs_ffft)
            std::printf("  (%.1f%% vs f-fft)", *s.reduction_vs_ffft * 100.0);
        std::printf("\n");
    }
    std::cout << "report:  " << report_path << "\nsummary: " << summary_path
              << "\n";

    if (report.failed_cells > 0) {
        std::cerr << report.failed_cells << " cell(s) failed\n";
        return 3;
    }
    return 0;
}

int cmd_trace(const std::string& config_path, const std::string& out_path,
              double value, std::uint64_t seed) {
    ExperimentSpec spec = load_spec(config_path);
    if (std::isnan(value)) value = spec.values.front();
    const std::string csv = estimator_trace_csv(spec, value, seed);
    if (out_path.empty())
        std::cout << csv;
    else {
        write_text(out_path, csv);
        std::cout << "trace: " << out_path << "\n";
    }
    return 0;
}

// Built-in oracle/invariant spot checks; a fast subset of the test suite.
int cmd_check() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
        if (!ok) ++failures;
    };

    OfdmConfig cfg;
    cfg.carrier_count = 64;
    cfg.block_count = 2;
    cfg.pilot_count = 16;

    std::mt19937_64 rng(7);
    auto random_symbols = [&](int count) {
        CVec v(count);
        for (auto& s : v)
            s = std::polar(1.0, 2.0 * std::numbers::pi * uniform_unit(rng));
        return v;
    };

    // Differential round trip
    {
        const CVec b = random_symbols(cfg.carrier_count - 1);
        const CVec d = differential_encode(b, cfg.reference_symbol);
        const CVec back = differential_decode(d);
        double err = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i)
            err = std::max(err, std::abs(back[i] - b[i]));
        check("differential encode/decode round trip", err < 1e-12);
    }

    // Modulate -> conv_fft loopback
    {
        const CVec d = random_symbols(cfg.carrier_count);
        const ComplexBlock block = modulate_block(d, cfg);
        const CVec z = conv_fft(block, cfg);
        double err = 0.0;
        for (int k = 0; k < cfg.carrier_count; ++k)
            err = std::max(err, std::abs(z[k] - d[k]));
        check("modulate/demodulate loopback", err < 1e-9);
    }

    // Bank vs direct summation
    {
        CVec noise(cfg.samples_per_block());
        for (auto& s : noise) {
            double g0, g1;
            gaussian_pair(rng, g0, g1);
            s = cplx{g0, g1};
        }
        ComplexBlock block{noise, 0.0, 1.0 / cfg.sample_rate_hz};
        const double fe = 1.37 * cfg.carrier_spacing_hz();
        const DemodBank fast = fractional_bank(block, 1, fe, cfg);
        const DemodBank slow = ref::direct_fractional_bank(block, 1, fe, cfg);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < fast.values.size(); ++i) {
            num += std::norm(fast.values[i] - slow.values[i]);
            den += std::norm(slow.values[i]);
        }
        check("fractional bank matches direct summation",
              std::sqrt(num / den) < 1e-9);
    }

    // Gradient direction vs finite differences
    {
        CVec v(cfg.samples_per_block());
        for (auto& s : v) {
            double g0, g1;
            gaussian_pair(rng, g0, g1);
            s = cplx{g0, g1};
        }
        ComplexBlock block{v, 0.0, 1.0 / cfg.sample_rate_hz};
        const int pilot_n = 6;
        const CVec pilots = random_symbols(pilot_n);
        WeightSet w = WeightSet::impulse(pilot_n + 1, 3);
        const double df = cfg.carrier_spacing_hz();
        const double fe = 1.1 * df;
        const double gamma = grad_fe(block, pilots, w, fe, 1, cfg);
        const double h = 1e-4 * df;
        const double ep = composite_mse(block, pilots, w, fe + h, 1, cfg);
        const double em = composite_mse(block, pilots, w, fe - h, 1, cfg);
        const double fd = (ep - em) / (2.0 * h);
        const double analytic = -4.0 * std::numbers::pi / 2.0 * gamma;
        check("f_e gradient matches finite differences",
              std::abs(fd - analytic) <= 1e-3 * std::abs(fd));
    }

    // A-FFT specializes to F-FFT when the estimator is frozen
    {
        OfdmConfig scfg = cfg;
        scfg.block_count = 2;
        ChannelSpec chan = ChannelSpec::default_three_path();
        chan.doppler_factor = 1e-4;
        chan.snr_db = 30.0;

        ExperimentSpec spec;
        spec.cfg = scfg;
        spec.channel = chan;
        spec.axis = SweepAxis::Snr;
        spec.values = {30.0};
        spec.seeds = {11};
        spec.receivers = {ReceiverKind::FFFT, ReceiverKind::AFFT};
        spec.params.estimator.mu_fe = 0.0;
        const MseReport rep = run_experiment(spec);
        check("a-fft(mu_fe=0) == f-fft",
              !rep.rows[0].failed && !rep.rows[1].failed &&
                  rep.rows[0].mse_db == rep.rows[1].mse_db);
    }

    if (failures) {
        std::printf("%d check(s) failed\n", failures);
        return 3;
    }
    std::printf("all checks passed\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"icilab - differential UWA-OFDM ICI mitigation laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", sweep_override, dump_frame_path;
    std::string trace_out;
    int seeds_override = 0, threads = 0;
    bool write_dat = false;
    double trace_value = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t trace_seed = 1;

    auto* run = app.add_subcommand("run", "run a parameter sweep");
    run->add_option("--config", config_path, "experiment config file");
    run->add_option("--sweep", sweep_override, "snr|alpha|carriers|fe");
    run->add_option("--seeds", seeds_override, "number of Monte-Carlo seeds");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads (0 = default)");
    run->add_flag("--dat", write_dat, "also write gnuplot .dat files");
    run->add_option("--dump-frame", dump_frame_path,
                    "write the first transmitted frame as a binary dump");

    auto* check = app.add_subcommand("check", "run built-in oracle checks");

    auto* trace = app.add_subcommand("trace", "dump estimator convergence CSV");
    trace->add_option("--config", config_path, "experiment config file");
    trace->add_option("--out", trace_out, "output CSV (stdout if omitted)");
    trace->add_option("--value", trace_value, "sweep value (default: first)");
    trace->add_option("--seed", trace_seed, "Monte-Carlo seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, sweep_override, seeds_override, out_dir,
                           threads, write_dat, dump_frame_path);
        if (check->parsed()) return cmd_check();
        if (trace->parsed())
            return cmd_trace(config_path, trace_out, trace_value, trace_seed);
    } catch (const icilab::config_error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
    return 0;
}
