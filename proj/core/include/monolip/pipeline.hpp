#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "monolip/certify.hpp"
#include "monolip/data.hpp"
#include "monolip/network.hpp"
#include "monolip/serialize.hpp"
#include "monolip/training.hpp"

namespace monolip {

/// Bad invocation or configuration; the CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
    std::size_t count = 100000;
    PopulationFractions fractions;
    std::uint64_t seed = 1;
    double lifetime_mean_ps = 1.5;
    std::string output;
};

void run_generate(const GenerateOptions& opts);

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string dataset;
    std::string model_out = "model.json";
    std::string history_out;      // default: <model stem>_history.csv
    std::string certificate_out;  // default: <model stem>_certificate.json

    std::vector<std::string> features = {"sum_pt", "min_ipchi2", "vertex_chi2", "fd_chi2"};
    std::vector<std::string> monotone_features = {"sum_pt", "min_ipchi2", "fd_chi2"};
    std::vector<std::size_t> hidden_widths = {20, 20};
    std::size_t group_size = 0;  // 0: largest group dividing every hidden width
    std::string activation = "group_sort";
    double lambda = 2.0;
    std::vector<double> lambda_per_input;  // empty: uniform budget
    std::string norm_scheme = "column_wise";
    std::string norm_mode = "direct";
    /// Baseline preset: relu activation, effectively inactive norm budget, no
    /// monotone features. Overrides the fields above.
    bool unconstrained = false;

    std::string loss = "bce";
    std::string optimizer = "adam";
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 20;
    std::size_t batch_size = 256;
    double val_fraction = 0.2;
    std::uint64_t seed = 1;

    std::size_t certify_pairs = 20000;
    std::size_t certify_points = 4000;
};

struct TrainSummary {
    std::string model_path;
    std::string history_path;
    std::string certificate_path;
    Certificate certificate;
    TrainHistory history;
};

/// Loads the dataset, splits train/validation, fits the feature transform on
/// the training split, trains, and writes model + history + certificate.
TrainSummary run_train(const TrainOptions& opts);

// ---------------------------------------------------------------------------
// threshold

struct ThresholdOptions {
    std::string model;
    std::string dataset;
    double background_rate = 0.1;
    std::string output;  // optional JSON
};

/// Response cut passing the requested fraction of background, interpolated
/// between order statistics. Pure helper shared with tests.
double solve_threshold(std::vector<double> background_responses, double background_rate);

double run_threshold(const ThresholdOptions& opts);

// ---------------------------------------------------------------------------
// heatmap

struct HeatmapOptions {
    std::string model;
    std::string dataset;
    std::string feature_x = "sum_pt";
    std::string feature_y = "min_ipchi2";
    std::size_t grid = 50;
    /// Raw-unit values for non-plotted features; dataset medians otherwise.
    std::vector<std::pair<std::string, double>> fixed_values;
    std::string output;
};

struct HeatmapGrid {
    Vector xs;  // grid values of feature_x (raw units)
    Vector ys;
    std::vector<double> responses;  // row-major, ys outer, xs inner

    double at(std::size_t iy, std::size_t ix) const { return responses[iy * xs.size() + ix]; }
};

HeatmapGrid compute_heatmap(const LoadedModel& model, const Dataset& dataset,
                            const HeatmapOptions& opts);

void run_heatmap(const HeatmapOptions& opts);

// ---------------------------------------------------------------------------
// efficiency

struct EfficiencyOptions {
    std::string model;
    std::string dataset;
    double threshold = 0.0;
    std::size_t bins = 20;
    double lifetime_lo_ps = 0.1;
    double lifetime_hi_ps = 20.0;
    /// Bins with fewer events than this are flagged low-stat.
    std::size_t min_bin_count = 50;
    std::string output;
};

struct EfficiencyBin {
    double lifetime_lo = 0.0;
    double lifetime_hi = 0.0;
    std::size_t n_signal = 0;
    double efficiency = 0.0;  // undefined when n_signal == 0
    bool low_stat = true;
};

std::vector<EfficiencyBin> compute_efficiency(const LoadedModel& model, const Dataset& dataset,
                                              const EfficiencyOptions& opts);

void run_efficiency(const EfficiencyOptions& opts);

// ---------------------------------------------------------------------------
// certify

struct CertifyOptions {
    std::string model;
    std::string dataset;
    std::size_t pairs = 100000;
    std::size_t points = 10000;
    double eps = 1e-4;
    /// The certification box spans the dataset features inflated by this
    /// fraction, probing behavior beyond the training data.
    double inflate = 0.5;
    std::uint64_t seed = 1;
    std::string output;
};

Certificate run_certify(const CertifyOptions& opts);

/// Certificate acceptability at the standard tolerances.
bool certificate_passes(const Certificate& cert);

// ---------------------------------------------------------------------------
// abs-experiment

struct AbsExperimentOptions {
    std::size_t depth = 3;
    std::size_t width = 16;
    double lambda = 1.0;
    std::uint64_t seed = 1;
    std::size_t epochs = 2000;
    std::string output;  // optional JSON
};

struct AbsExperimentResult {
    double group_sort_mse = 0.0;
    double relu_mse = 0.0;
};

/// Fits y = |x| with a sort-activation net and an identically constrained
/// relu net under the same budget.
AbsExperimentResult run_abs_experiment(const AbsExperimentOptions& opts);

// ---------------------------------------------------------------------------
// shared helpers

/// Deterministic split into (train, validation) event lists.
std::pair<std::vector<DvEvent>, std::vector<DvEvent>> split_dataset(
    const std::vector<DvEvent>& events, double val_fraction, std::uint64_t seed);

/// f over the standardized features of each event.
std::vector<double> model_responses(const LoadedModel& model,
                                    const std::vector<DvEvent>& events);

/// Throws UsageError when the path does not exist.
void require_file(const std::string& path, const std::string& what);

}  // namespace monolip
