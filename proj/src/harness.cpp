#include "icilab/harness.hpp"

#include "icilab/channel.hpp"
#include "icilab/fft.hpp"
#include "icilab/rng.hpp"
#include "icilab/signal_model.hpp"
#include "icilab/txchain.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace icilab {

std::string sweep_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Snr: return "snr";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::Carriers: return "carriers";
        case SweepAxis::Fe: return "fe";
    }
    throw config_error("unknown sweep axis");
}

SweepAxis sweep_from_name(const std::string& name) {
    if (name == "snr") return SweepAxis::Snr;
    if (name == "alpha") return SweepAxis::Alpha;
    if (name == "carriers") return SweepAxis::Carriers;
    if (name == "fe") return SweepAxis::Fe;
    throw config_error("unknown sweep '" + name + "'");
}

int effective_pilot_count(int configured, int carriers) {
    return std::max(2, std::min(configured, carriers / 4));
}

void ExperimentSpec::validate() const {
    if (values.empty()) throw config_error("sweep needs at least one value");
    if (seeds.empty()) throw config_error("need at least one seed");
    if (receivers.empty()) throw config_error("need at least one receiver");
    if (axis == SweepAxis::Carriers) {
        for (double v : values) {
            const auto k = static_cast<long long>(std::llround(v));
            if (static_cast<double>(k) != v || k < 4 ||
                !dsp::is_power_of_two(static_cast<std::size_t>(k)))
                throw config_error("carriers sweep values must be powers of two");
            if ((1LL << 13) % k != 0)
                throw config_error("carriers sweep must keep K*N = 2^13");
        }
    }
    if (axis == SweepAxis::Fe) {
        for (double v : values)
            if (v <= 0) throw config_error("fe sweep values must be positive");
    }
}

namespace {

struct CellSetup {
    OfdmConfig cfg;
    ChannelSpec chan;
    ReceiverParams params;
    ReceivedFrame frame;
    CVec pilots;
    std::vector<CVec> btrue;
};

CellSetup make_cell(const ExperimentSpec& spec, double value,
                    std::size_t value_index, std::uint64_t seed) {
    CellSetup cell;
    cell.cfg = spec.cfg;
    cell.chan = spec.channel;
    cell.params = spec.params;

    switch (spec.axis) {
        case SweepAxis::Snr:
            cell.chan.snr_db = value;
            break;
        case SweepAxis::Alpha:
            cell.chan.doppler_factor = value;
            break;
        case SweepAxis::Carriers: {
            const int k = static_cast<int>(std::llround(value));
            cell.cfg.carrier_count = k;
            cell.cfg.block_count = (1 << 13) / k;
            break;
        }
        case SweepAxis::Fe:
            cell.params.fe_fixed_hz = value;
            break;
    }

    cell.cfg.pilot_count =
        effective_pilot_count(cell.cfg.pilot_count, cell.cfg.carrier_count);
    cell.cfg.validate();
    cell.chan.validate(cell.cfg);

    const int K = cell.cfg.carrier_count;
    const int bps = bits_per_symbol(cell.cfg.psk_order);
    const std::uint64_t cell_seed = mix_seed(seed, value_index);

    std::mt19937_64 bit_rng(mix_seed(cell_seed, 0xB175u));
    std::vector<CVec> encoded(cell.cfg.block_count);
    cell.btrue.resize(cell.cfg.block_count);
    for (int b = 0; b < cell.cfg.block_count; ++b) {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(K - 1) * bps);
        for (auto& bit : bits) bit = static_cast<std::uint8_t>(bit_rng() & 1u);
        cell.btrue[b] = map_bits_to_psk(bits, cell.cfg.psk_order);
        encoded[b] = differential_encode(cell.btrue[b], cell.cfg.reference_symbol);
    }
    cell.pilots.assign(cell.btrue[0].begin(),
                       cell.btrue[0].begin() + cell.cfg.pilot_count);

    const Frame frame = build_frame(std::move(encoded), cell.cfg);
    CVec rx = apply_channel(frame.baseband, cell.chan, cell.cfg);
    rx = add_noise(rx, cell.chan.snr_db, mix_seed(cell_seed, 0x4015u));

    FrontEndOptions fe_opts;
    fe_opts.coarse_alpha = spec.coarse_alpha;
    fe_opts.timing_alpha = spec.timing_tracking ? cell.chan.doppler_factor
                                                : spec.coarse_alpha;
    fe_opts.true_alpha = cell.chan.doppler_factor;
    cell.frame = front_end(rx, cell.cfg, fe_opts);
    return cell;
}

}  // namespace

MseReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    MseReport report;
    report.axis = spec.axis;

    const std::size_t n_values = spec.values.size();
    const std::size_t n_seeds = spec.seeds.size();
    const std::size_t n_recv = spec.receivers.size();
    report.rows.resize(n_values * n_seeds * n_recv);

    const auto n_cells = static_cast<long long>(n_values * n_seeds);
#ifdef _OPENMP
    const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#endif

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long cell_idx = 0; cell_idx < n_cells; ++cell_idx) {
        const std::size_t vi = static_cast<std::size_t>(cell_idx) / n_seeds;
        const std::size_t si = static_cast<std::size_t>(cell_idx) % n_seeds;
        const double value = spec.values[vi];
        const std::uint64_t seed = spec.seeds[si];
        MseRow* rows = report.rows.data() + (vi * n_seeds + si) * n_recv;

        for (std::size_t r = 0; r < n_recv; ++r) {
            rows[r].value = value;
            rows[r].receiver = spec.receivers[r];
            rows[r].seed = seed;
        }

        try {
            const CellSetup cell = make_cell(spec, value, vi, seed);
            for (std::size_t r = 0; r < n_recv; ++r) {
                MseRow& row = rows[r];
                try {
                    const ReceiverOutput out =
                        run_receiver(row.receiver, cell.frame, cell.pilots,
                                     cell.cfg, cell.params);
                    row.mse_db =
                        frame_mse_db(out.bhat, cell.btrue, cell.cfg.pilot_count);
                    if (row.receiver == ReceiverKind::AFFT) {
                        row.fe_hat = out.fe_hat;
                        row.iters = out.estimator_iterations;
                        row.has_estimate = true;
                    }
                } catch (const std::exception& ex) {
                    row.failed = true;
                    row.error = ex.what();
                }
            }
        } catch (const std::exception& ex) {
            for (std::size_t r = 0; r < n_recv; ++r) {
                rows[r].failed = true;
                rows[r].error = ex.what();
            }
        }
    }

    for (const MseRow& row : report.rows)
        if (row.failed) ++report.failed_cells;
    return report;
}

namespace {

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

std::string report_csv(const MseReport& report) {
    std::string out = "sweep,value,receiver,seed,mse_db,fe_hat,iters\n";
    const std::string axis = sweep_name(report.axis);
    for (const MseRow& row : report.rows) {
        out += axis;
        out += ',';
        out += format_double("%.12g", row.value);
        out += ',';
        out += receiver_name(row.receiver);
        out += ',';
        out += std::to_string(row.seed);
        out += ',';
        out += row.failed ? "nan" : format_double("%.6f", row.mse_db);
        out += ',';
        if (row.has_estimate && !row.failed)
            out += format_double("%.9g", row.fe_hat);
        out += ',';
        if (row.has_estimate && !row.failed) out += std::to_string(row.iters);
        out += '\n';
    }
    return out;
}

std::vector<SummaryRow> summarize(const MseReport& report) {
    std::vector<SummaryRow> rows;

    // Rows are laid out value-major, receiver-minor, seeds in between.
    std::vector<double> values;
    std::vector<ReceiverKind> kinds;
    for (const MseRow& r : report.rows) {
        if (values.empty() || values.back() != r.value) {
            if (std::find(values.begin(), values.end(), r.value) == values.end())
                values.push_back(r.value);
        }
        if (std::find(kinds.begin(), kinds.end(), r.receiver) == kinds.end())
            kinds.push_back(r.receiver);
    }

    for (double value : values) {
        double ffft_median_lin = -1.0;
        std::vector<SummaryRow> batch;
        for (ReceiverKind kind : kinds) {
            std::vector<double> mses;
            for (const MseRow& r : report.rows)
                if (r.value == value && r.receiver == kind && !r.failed)
                    mses.push_back(r.mse_db);
            if (mses.empty()) continue;

            std::sort(mses.begin(), mses.end());
            SummaryRow s;
            s.value = value;
            s.receiver = kind;
            s.seeds = static_cast<int>(mses.size());
            const std::size_t n = mses.size();
            s.median_mse_db = (n % 2 == 1)
                                  ? mses[n / 2]
                                  : 0.5 * (mses[n / 2 - 1] + mses[n / 2]);
            double sum = 0.0;
            for (double m : mses) sum += m;
            s.mean_mse_db = sum / static_cast<double>(n);
            if (kind == ReceiverKind::FFFT)
                ffft_median_lin = linear_from_db(s.median_mse_db);
            batch.push_back(s);
        }
        for (SummaryRow& s : batch) {
            if (s.receiver == ReceiverKind::AFFT && ffft_median_lin > 0)
                s.reduction_vs_ffft =
                    1.0 - linear_from_db(s.median_mse_db) / ffft_median_lin;
            rows.push_back(s);
        }
    }
    return rows;
}

std::string summary_csv(SweepAxis axis, const std::vector<SummaryRow>& rows) {
    std::string out =
        "sweep,value,receiver,seeds,median_mse_db,mean_mse_db,"
        "reduction_vs_ffft_pct\n";
    const std::string axis_name = sweep_name(axis);
    for (const SummaryRow& s : rows) {
        out += axis_name;
        out += ',';
        out += format_double("%.12g", s.value);
        out += ',';
        out += receiver_name(s.receiver);
        out += ',';
        out += std::to_string(s.seeds);
        out += ',';
        out += format_double("%.6f", s.median_mse_db);
        out += ',';
        out += format_double("%.6f", s.mean_mse_db);
        out += ',';
        if (s.reduction_vs_ffft)
            out += format_double("%.4f", *s.reduction_vs_ffft * 100.0);
        out += '\n';
    }
    return out;
}

std::string summary_dat(const std::vector<SummaryRow>& rows, ReceiverKind kind) {
    std::string out = "# value median_mse_db mean_mse_db\n";
    for (const SummaryRow& s : rows) {
        if (s.receiver != kind) continue;
        out += format_double("%.12g", s.value);
        out += ' ';
        out += format_double("%.6f", s.median_mse_db);
        out += ' ';
        out += format_double("%.6f", s.mean_mse_db);
        out += '\n';
    }
    return out;
}

// ---- config parsing ----

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    if (value == "inf" || value == "+inf")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: bad number for '" + key + "': " + value);
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    const auto i = static_cast<long long>(std::llround(v));
    if (static_cast<double>(i) != v)
        throw config_error("config: '" + key + "' must be an integer");
    return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    throw config_error("config: '" + key + "' must be true/false");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string token;
    std::stringstream ss(value);
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (!token.empty()) parts.push_back(token);
    }
    return parts;
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text) {
    ExperimentSpec spec;
    bool paths_reset = false;
    bool seeds_from_list = false;
    std::uint64_t seed_base = 1;
    long long seed_count = static_cast<long long>(spec.seeds.size());

    std::stringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config line " + std::to_string(lineno) +
                               ": empty key or value");

        if (key == "carriers") spec.cfg.carrier_count = static_cast<int>(parse_int(key, value));
        else if (key == "blocks") spec.cfg.block_count = static_cast<int>(parse_int(key, value));
        else if (key == "bandwidth_hz") spec.cfg.bandwidth_hz = parse_double(key, value);
        else if (key == "center_freq_hz") spec.cfg.center_freq_hz = parse_double(key, value);
        else if (key == "sample_rate_hz") spec.cfg.sample_rate_hz = parse_double(key, value);
        else if (key == "guard_interval_s") spec.cfg.guard_interval_s = parse_double(key, value);
        else if (key == "psk_order") spec.cfg.psk_order = static_cast<int>(parse_int(key, value));
        else if (key == "pilot_count") spec.cfg.pilot_count = static_cast<int>(parse_int(key, value));
        else if (key == "snr_db") spec.channel.snr_db = parse_double(key, value);
        else if (key == "alpha") spec.channel.doppler_factor = parse_double(key, value);
        else if (key == "path") {
            std::stringstream ps(value);
            double re, im, delay;
            if (!(ps >> re >> im >> delay))
                throw config_error("config: path needs 're im delay_s [drift_rad_s]'");
            double drift = 0.0;
            ps >> drift;
            if (!paths_reset) {
                spec.channel.paths.clear();
                paths_reset = true;
            }
            spec.channel.paths.push_back({cplx{re, im}, delay, drift});
        } else if (key == "receivers") {
            spec.receivers.clear();
            for (const auto& name : split_list(value))
                spec.receivers.push_back(receiver_from_name(name));
        } else if (key == "sweep") {
            spec.axis = sweep_from_name(value);
        } else if (key == "sweep_values") {
            spec.values.clear();
            for (const auto& v : split_list(value))
                spec.values.push_back(parse_double(key, v));
        } else if (key == "seeds") {
            seed_count = parse_int(key, value);
            if (seed_count < 1) throw config_error("config: seeds must be >= 1");
        } else if (key == "seed_base") {
            seed_base = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "seed_list") {
            spec.seeds.clear();
            for (const auto& v : split_list(value))
                spec.seeds.push_back(static_cast<std::uint64_t>(parse_int(key, v)));
            seeds_from_list = true;
        } else if (key == "taps") {
            spec.params.taps = static_cast<int>(parse_int(key, value));
        } else if (key == "fe_fixed_hz") {
            spec.params.fe_fixed_hz = parse_double(key, value);
        } else if (key == "mu_w") {
            spec.params.estimator.mu_w = parse_double(key, value);
        } else if (key == "mu_fe") {
            if (value == "auto") spec.params.estimator.mu_fe = -1.0;
            else if (value == "off") spec.params.estimator.mu_fe = 0.0;
            else spec.params.estimator.mu_fe = parse_double(key, value);
        } else if (key == "eta_db") {
            spec.params.estimator.eta_db = parse_double(key, value);
        } else if (key == "max_outer") {
            spec.params.estimator.max_outer = static_cast<int>(parse_int(key, value));
        } else if (key == "max_inner") {
            spec.params.estimator.max_inner = static_cast<int>(parse_int(key, value));
        } else if (key == "fe_init_hz") {
            spec.params.estimator.fe_init_hz = parse_double(key, value);
        } else if (key == "error_threshold") {
            spec.params.estimator.error_threshold = parse_double(key, value);
        } else if (key == "gradient_scaling") {
            spec.params.estimator.gradient_scaling = parse_bool(key, value);
        } else if (key == "coarse_alpha") {
            spec.coarse_alpha = parse_double(key, value);
        } else if (key == "timing_tracking") {
            spec.timing_tracking = parse_bool(key, value);
        } else if (key == "threads") {
            spec.threads = static_cast<int>(parse_int(key, value));
        } else {
            throw config_error("config line " + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
        }
    }

    if (!seeds_from_list) {
        spec.seeds.clear();
        for (long long i = 0; i < seed_count; ++i)
            spec.seeds.push_back(seed_base + static_cast<std::uint64_t>(i));
    }
    return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string estimator_trace_csv(const ExperimentSpec& spec, double value,
                                std::uint64_t seed) {
    std::size_t vi = 0;
    for (; vi < spec.values.size(); ++vi)
        if (spec.values[vi] == value) break;
    if (vi == spec.values.size())
        throw config_error("trace: value not in sweep_values");

    const CellSetup cell = make_cell(spec, value, vi, seed);
    const int half_span = (cell.params.taps - 1) / 2;
    const EstimatorResult est =
        estimate_fiducial_offset(cell.frame.blocks.front(), cell.pilots,
                                 half_span, cell.cfg, cell.params.estimator);

    std::string out = "iter,fe_hz,e_db\n";
    out += "0," + format_double("%.9g", est.initial_fe) + "," +
           format_double("%.6f", db_from_linear(std::max(est.initial_mse, 1e-300))) +
           "\n";
    for (std::size_t i = 0; i < est.mse_trace.size(); ++i) {
        out += std::to_string(i + 1) + ",";
        out += format_double("%.9g", est.fe_trace[i]);
        out += ",";
        out += format_double("%.6f", db_from_linear(std::max(est.mse_trace[i], 1e-300)));
        out += "\n";
    }
    return out;
}

}  // namespace icilab
