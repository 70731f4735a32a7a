#pragma once

#include "icilab/receivers.hpp"
#include "icilab/types.hpp"

#include <optional>
#include <string>

namespace icilab {

enum class SweepAxis { Snr, Alpha, Carriers, Fe };

std::string sweep_name(SweepAxis axis);
SweepAxis sweep_from_name(const std::string& name);

struct ExperimentSpec {
    OfdmConfig cfg;
    ChannelSpec channel = ChannelSpec::default_three_path();
    std::vector<ReceiverKind> receivers = {
        ReceiverKind::ConvFFT, ReceiverKind::PFFT, ReceiverKind::FFFT,
        ReceiverKind::AFFT};
    SweepAxis axis = SweepAxis::Snr;
    std::vector<double> values = {0, 10, 20, 30};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    ReceiverParams params;
    double coarse_alpha = 0.0;
    bool timing_tracking = true;  // idealized sync tracks the true drift
    int threads = 0;              // 0 = runtime default

    void validate() const;
};

struct MseRow {
    double value = 0.0;
    ReceiverKind receiver = ReceiverKind::ConvFFT;
    std::uint64_t seed = 0;
    double mse_db = 0.0;
    double fe_hat = 0.0;
    int iters = 0;
    bool has_estimate = false;
    bool failed = false;
    std::string error;
};

struct MseReport {
    SweepAxis axis = SweepAxis::Snr;
    std::vector<MseRow> rows;
    int failed_cells = 0;
};

MseReport run_experiment(const ExperimentSpec& spec);

// Effective pilot count for a given carrier budget: the configured P,
// capped at K/4 for small-K sweeps (never below 2).
int effective_pilot_count(int configured, int carriers);

// CSV with the fixed header sweep,value,receiver,seed,mse_db,fe_hat,iters.
std::string report_csv(const MseReport& report);

struct SummaryRow {
    double value = 0.0;
    ReceiverKind receiver = ReceiverKind::ConvFFT;
    double median_mse_db = 0.0;
    double mean_mse_db = 0.0;
    std::optional<double> reduction_vs_ffft;  // linear-domain, a-fft rows
    int seeds = 0;
};

std::vector<SummaryRow> summarize(const MseReport& report);
std::string summary_csv(SweepAxis axis, const std::vector<SummaryRow>& rows);

// gnuplot-friendly companion: "value median_db mean_db" per receiver.
std::string summary_dat(const std::vector<SummaryRow>& rows, ReceiverKind kind);

// Key-value experiment config (see README for the schema). Unknown keys
// are rejected.
ExperimentSpec parse_config_text(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);

// Convergence trace of the A-FFT estimator on one cell: CSV iter,fe_hz,e_db.
std::string estimator_trace_csv(const ExperimentSpec& spec, double value,
                                std::uint64_t seed);

}  // namespace icilab
