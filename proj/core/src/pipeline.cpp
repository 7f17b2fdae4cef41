#include "monolip/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "monolip/io.hpp"
#include "monolip/random.hpp"

namespace monolip {

namespace {

Activation activation_from_name(const std::string& name) {
    if (name == "group_sort") return Activation::group_sort;
    if (name == "relu") return Activation::relu;
    throw UsageError("unknown activation '" + name + "' (valid: group_sort, relu)");
}

NormScheme scheme_from_name(const std::string& name) {
    if (name == "variant_a") return NormScheme::variant_a;
    if (name == "variant_b") return NormScheme::variant_b;
    if (name == "column_wise") return NormScheme::column_wise;
    throw UsageError("unknown norm scheme '" + name +
                     "' (valid: variant_a, variant_b, column_wise)");
}

NormMode mode_from_name(const std::string& name) {
    if (name == "direct") return NormMode::direct;
    if (name == "project") return NormMode::project;
    throw UsageError("unknown norm mode '" + name + "' (valid: direct, project)");
}

LossKind loss_from_name(const std::string& name) {
    if (name == "bce") return LossKind::bce_with_logit;
    if (name == "mse") return LossKind::mse;
    throw UsageError("unknown loss '" + name + "' (valid: bce, mse)");
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "adam") return OptimizerKind::adam;
    if (name == "sgd") return OptimizerKind::sgd;
    throw UsageError("unknown optimizer '" + name + "' (valid: adam, sgd)");
}

std::string output_stem(const std::string& model_out) {
    const std::string suffix = ".json";
    if (model_out.size() > suffix.size() &&
        model_out.compare(model_out.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return model_out.substr(0, model_out.size() - suffix.size());
    }
    return model_out;
}

const Standardization& require_scaler(const LoadedModel& model, const std::string& what) {
    if (!model.standardization) {
        throw UsageError("model carries no feature standardization block; " + what +
                         " needs named features");
    }
    return *model.standardization;
}

double standardize_raw(double raw, const Standardization& std, std::size_t f) {
    return (std::log1p(raw) - std.mean[f]) / std.stddev[f];
}

Box dataset_box(const LoadedModel& model, const Dataset& dataset, double inflate) {
    const auto& scaler = require_scaler(model, "certification");
    std::vector<Vector> points;
    points.reserve(dataset.events.size());
    for (const auto& e : dataset.events) points.push_back(standardized_features(e, scaler));
    return bounding_box(points, inflate);
}

}  // namespace

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw UsageError(what + " path is empty");
    if (!std::filesystem::exists(path)) {
        throw UsageError(what + " file not found: " + path);
    }
}

void run_generate(const GenerateOptions& opts) {
    if (opts.output.empty()) throw UsageError("generate needs an --output path");
    if (opts.count == 0) throw UsageError("cannot generate an empty dataset");
    PopulationFractions fractions = opts.fractions;
    try {
        fractions.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    GeneratorConfig config;
    if (!(opts.lifetime_mean_ps > 0.0)) throw UsageError("lifetime mean must be positive");
    config.signal_lifetime_mean_ps = opts.lifetime_mean_ps;
    const Dataset dataset = generate_synthetic(opts.count, fractions, opts.seed, config);
    save_csv(dataset, opts.output);
}

std::pair<std::vector<DvEvent>, std::vector<DvEvent>> split_dataset(
    const std::vector<DvEvent>& events, double val_fraction, std::uint64_t seed) {
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
        throw std::invalid_argument("val_fraction must lie in [0, 1)");
    }
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, 0x55u));
    rng.shuffle(order);
    const std::size_t val_count =
        static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(events.size())));
    std::vector<DvEvent> train_events;
    std::vector<DvEvent> val_events;
    train_events.reserve(events.size() - val_count);
    val_events.reserve(val_count);
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < val_count) {
            val_events.push_back(events[order[i]]);
        } else {
            train_events.push_back(events[order[i]]);
        }
    }
    return {std::move(train_events), std::move(val_events)};
}

TrainSummary run_train(const TrainOptions& opts) {
    require_file(opts.dataset, "dataset");
    if (opts.model_out.empty()) throw UsageError("train needs a --model-out path");

    TrainOptions resolved = opts;
    if (opts.unconstrained) {
        // Plain relu MLP: a budget this loose never binds at desk scale.
        resolved.activation = "relu";
        resolved.lambda = 1e6;
        resolved.monotone_features.clear();
        resolved.lambda_per_input.clear();
        resolved.norm_scheme = "variant_b";
        resolved.norm_mode = "direct";
    }
    if (resolved.features.empty()) throw UsageError("at least one feature is required");
    for (const auto& name : resolved.features) {
        try {
            feature_index(name);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    for (std::size_t i = 0; i < resolved.features.size(); ++i) {
        for (std::size_t j = i + 1; j < resolved.features.size(); ++j) {
            if (resolved.features[i] == resolved.features[j]) {
                throw UsageError("duplicate feature '" + resolved.features[i] + "'");
            }
        }
    }

    NetworkSpec spec;
    spec.input_dim = resolved.features.size();
    spec.hidden_widths = resolved.hidden_widths;
    spec.activation = activation_from_name(resolved.activation);
    if (spec.activation == Activation::group_sort) {
        std::size_t group = resolved.group_size;
        if (group == 0) {
            for (std::size_t w : resolved.hidden_widths) group = std::gcd(group, w);
            if (group == 0) group = 1;  // no hidden layers
        }
        spec.group_size = group;
    }
    spec.lambda = resolved.lambda;
    if (!resolved.lambda_per_input.empty()) {
        if (resolved.lambda_per_input.size() != spec.input_dim) {
            throw UsageError("lambda-per-input needs one value per feature");
        }
        spec.lambda_per_input = Vector(resolved.lambda_per_input.begin(),
                                       resolved.lambda_per_input.end());
    }
    for (const auto& name : resolved.monotone_features) {
        const auto it = std::find(resolved.features.begin(), resolved.features.end(), name);
        if (it == resolved.features.end()) {
            throw UsageError("monotone feature '" + name + "' is not among the model features");
        }
        spec.monotone_indices.push_back(
            static_cast<std::size_t>(it - resolved.features.begin()));
    }
    spec.norm_scheme = scheme_from_name(resolved.norm_scheme);
    spec.norm_mode = mode_from_name(resolved.norm_mode);
    spec.seed = resolved.seed;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const Dataset dataset = load_csv(opts.dataset);
    if (dataset.events.empty()) throw UsageError("dataset has no rows: " + opts.dataset);
    auto [train_events, val_events] =
        split_dataset(dataset.events, resolved.val_fraction, resolved.seed);
    if (train_events.empty()) throw UsageError("training split is empty");
    const Standardization scaler = fit_standardization(train_events, resolved.features);
    const TrainingSet train_set = to_training_set(train_events, scaler);
    const TrainingSet val_set = to_training_set(val_events, scaler);

    MonotonicNetwork net = MonotonicNetwork::initialize(spec);
    TrainConfig cfg;
    cfg.loss = loss_from_name(resolved.loss);
    cfg.optimizer = optimizer_from_name(resolved.optimizer);
    cfg.learning_rate = resolved.learning_rate;
    cfg.beta1 = resolved.beta1;
    cfg.beta2 = resolved.beta2;
    cfg.epsilon = resolved.epsilon;
    cfg.epochs = resolved.epochs;
    cfg.batch_size = resolved.batch_size;
    cfg.seed = resolved.seed;
    TrainHistory history =
        train(net, train_set, cfg, val_events.empty() ? nullptr : &val_set);

    TrainSummary summary;
    summary.model_path = resolved.model_out;
    const std::string stem = output_stem(resolved.model_out);
    summary.history_path =
        resolved.history_out.empty() ? stem + "_history.csv" : resolved.history_out;
    summary.certificate_path = resolved.certificate_out.empty() ? stem + "_certificate.json"
                                                                : resolved.certificate_out;

    save_model(net, scaler, summary.model_path);
    write_history_csv(history, summary.history_path);

    const Box box = bounding_box(train_set.inputs, 0.5);
    summary.certificate = certify(net, resolved.certify_pairs, resolved.certify_points, box,
                                  1e-4, resolved.seed);
    save_certificate(summary.certificate, summary.certificate_path);
    summary.history = std::move(history);
    return summary;
}

double solve_threshold(std::vector<double> background_responses, double background_rate) {
    if (background_responses.empty()) {
        throw std::invalid_argument("no background responses to solve a threshold on");
    }
    if (!(background_rate > 0.0 && background_rate < 1.0)) {
        throw std::invalid_argument("background rate must lie strictly between 0 and 1");
    }
    std::sort(background_responses.begin(), background_responses.end());
    const std::size_t n = background_responses.size();
    // Fraction of background at or above t equals the rate at the
    // (1-rate)-quantile, linearly interpolated between order statistics.
    const double h = (1.0 - background_rate) * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return background_responses[lo] +
           frac * (background_responses[hi] - background_responses[lo]);
}

std::vector<double> model_responses(const LoadedModel& model,
                                    const std::vector<DvEvent>& events) {
    const auto& scaler = require_scaler(model, "evaluation");
    const EffectiveState eff = compute_effective(model.net);
    std::vector<double> responses;
    responses.reserve(events.size());
    for (const auto& e : events) {
        responses.push_back(forward_value(model.net, eff, standardized_features(e, scaler)));
    }
    return responses;
}

double run_threshold(const ThresholdOptions& opts) {
    require_file(opts.model, "model");
    require_file(opts.dataset, "dataset");
    if (!(opts.background_rate > 0.0 && opts.background_rate < 1.0)) {
        throw UsageError("background rate must lie strictly between 0 and 1");
    }
    const LoadedModel model = load_model(opts.model);
    const Dataset dataset = load_csv(opts.dataset);
    std::vector<DvEvent> background;
    for (const auto& e : dataset.events) {
        if (!e.is_signal) background.push_back(e);
    }
    if (background.empty()) {
        throw UsageError("dataset has no background events: " + opts.dataset);
    }
    const double threshold =
        solve_threshold(model_responses(model, background), opts.background_rate);
    if (!opts.output.empty()) {
        nlohmann::json j;
        j["background_rate"] = opts.background_rate;
        j["threshold"] = threshold;
        atomic_write_file(opts.output, j.dump(2) + "\n");
    }
    return threshold;
}

HeatmapGrid compute_heatmap(const LoadedModel& model, const Dataset& dataset,
                            const HeatmapOptions& opts) {
    if (opts.grid < 2) throw std::invalid_argument("heatmap grid must be at least 2");
    if (dataset.events.empty()) throw std::invalid_argument("heatmap needs a non-empty dataset");
    const auto& scaler = require_scaler(model, "the heatmap");
    const auto& names = scaler.feature_names;

    const auto position_of = [&names](const std::string& name) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            std::string known;
            for (const auto& n : names) {
                if (!known.empty()) known += ", ";
                known += n;
            }
            throw std::invalid_argument("unknown feature '" + name +
                                        "' for this model (model features: " + known + ")");
        }
        return static_cast<std::size_t>(it - names.begin());
    };
    const std::size_t fx = position_of(opts.feature_x);
    const std::size_t fy = position_of(opts.feature_y);
    if (fx == fy) throw std::invalid_argument("heatmap axes must differ");

    // Non-plotted features pinned to dataset medians unless overridden.
    Vector fixed_raw = feature_medians(dataset.events, names);
    for (const auto& [name, value] : opts.fixed_values) {
        fixed_raw[position_of(name)] = value;
    }

    const auto axis_values = [&](std::size_t f) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        const std::size_t column = feature_index(names[f]);
        for (const auto& e : dataset.events) {
            const double v = feature_value(e, column);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        Vector values(opts.grid);
        if (lo > 0.0 && hi > lo) {  // features are positive; sweep log-spaced
            const double ratio = hi / lo;
            for (std::size_t i = 0; i < opts.grid; ++i) {
                values[i] = lo * std::pow(ratio, static_cast<double>(i) /
                                                     static_cast<double>(opts.grid - 1));
            }
        } else {
            const double extent = hi > lo ? hi - lo : 1.0;
            for (std::size_t i = 0; i < opts.grid; ++i) {
                values[i] = lo + extent * static_cast<double>(i) /
                                     static_cast<double>(opts.grid - 1);
            }
        }
        return values;
    };

    HeatmapGrid out;
    out.xs = axis_values(fx);
    out.ys = axis_values(fy);
    out.responses.resize(opts.grid * opts.grid);
    const EffectiveState eff = compute_effective(model.net);
    Vector input(names.size());
    for (std::size_t iy = 0; iy < opts.grid; ++iy) {
        for (std::size_t ix = 0; ix < opts.grid; ++ix) {
            for (std::size_t f = 0; f < names.size(); ++f) {
                double raw = fixed_raw[f];
                if (f == fx) raw = out.xs[ix];
                if (f == fy) raw = out.ys[iy];
                input[f] = standardize_raw(raw, scaler, f);
            }
            out.responses[iy * opts.grid + ix] = forward_value(model.net, eff, input);
        }
    }
    return out;
}

void run_heatmap(const HeatmapOptions& opts) {
    require_file(opts.model, "model");
    require_file(opts.dataset, "dataset");
    if (opts.output.empty()) throw UsageError("heatmap needs an --output path");
    const LoadedModel model = load_model(opts.model);
    const Dataset dataset = load_csv(opts.dataset);
    HeatmapGrid grid;
    try {
        grid = compute_heatmap(model, dataset, opts);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::ostringstream out;
    out << opts.feature_x << ',' << opts.feature_y << ",response\n";
    for (std::size_t iy = 0; iy < grid.ys.size(); ++iy) {
        for (std::size_t ix = 0; ix < grid.xs.size(); ++ix) {
            out << format_double(grid.xs[ix]) << ',' << format_double(grid.ys[iy]) << ','
                << format_double(grid.at(iy, ix)) << '\n';
        }
    }
    atomic_write_file(opts.output, out.str());
}

std::vector<EfficiencyBin> compute_efficiency(const LoadedModel& model, const Dataset& dataset,
                                              const EfficiencyOptions& opts) {
    if (opts.bins == 0) throw std::invalid_argument("need at least one lifetime bin");
    if (!(opts.lifetime_lo_ps > 0.0 && opts.lifetime_hi_ps > opts.lifetime_lo_ps)) {
        throw std::invalid_argument("lifetime range must be positive and increasing");
    }
    std::vector<DvEvent> signal;
    for (const auto& e : dataset.events) {
        if (e.is_signal && e.true_lifetime_ps) signal.push_back(e);
    }
    if (signal.empty()) {
        throw std::invalid_argument("dataset has no signal events with a true lifetime");
    }
    const std::vector<double> responses = model_responses(model, signal);

    const double log_ratio = std::log(opts.lifetime_hi_ps / opts.lifetime_lo_ps);
    std::vector<EfficiencyBin> bins(opts.bins);
    std::vector<std::size_t> passed(opts.bins, 0);
    for (std::size_t b = 0; b < opts.bins; ++b) {
        bins[b].lifetime_lo = opts.lifetime_lo_ps *
                              std::exp(log_ratio * static_cast<double>(b) /
                                       static_cast<double>(opts.bins));
        bins[b].lifetime_hi = opts.lifetime_lo_ps *
                              std::exp(log_ratio * static_cast<double>(b + 1) /
                                       static_cast<double>(opts.bins));
    }
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double tau = *signal[i].true_lifetime_ps;
        if (tau < opts.lifetime_lo_ps || tau >= opts.lifetime_hi_ps) continue;
        const auto b = static_cast<std::size_t>(
            std::log(tau / opts.lifetime_lo_ps) / log_ratio * static_cast<double>(opts.bins));
        const std::size_t bin = std::min(b, opts.bins - 1);
        ++bins[bin].n_signal;
        if (responses[i] >= opts.threshold) ++passed[bin];
    }
    for (std::size_t b = 0; b < opts.bins; ++b) {
        bins[b].low_stat = bins[b].n_signal < opts.min_bin_count;
        if (bins[b].n_signal > 0) {
            bins[b].efficiency = static_cast<double>(passed[b]) /
                                 static_cast<double>(bins[b].n_signal);
        }
    }
    return bins;
}

void run_efficiency(const EfficiencyOptions& opts) {
    require_file(opts.model, "model");
    require_file(opts.dataset, "dataset");
    if (opts.output.empty()) throw UsageError("efficiency needs an --output path");
    const LoadedModel model = load_model(opts.model);
    const Dataset dataset = load_csv(opts.dataset);
    std::vector<EfficiencyBin> bins;
    try {
        bins = compute_efficiency(model, dataset, opts);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::ostringstream out;
    out << "lifetime_lo_ps,lifetime_hi_ps,n_signal,efficiency,low_stat\n";
    for (const auto& bin : bins) {
        out << format_double(bin.lifetime_lo) << ',' << format_double(bin.lifetime_hi) << ','
            << bin.n_signal << ',';
        if (bin.n_signal > 0) out << format_double(bin.efficiency);
        out << ',' << (bin.low_stat ? 1 : 0) << '\n';
    }
    atomic_write_file(opts.output, out.str());
}

Certificate run_certify(const CertifyOptions& opts) {
    require_file(opts.model, "model");
    require_file(opts.dataset, "dataset");
    const LoadedModel model = load_model(opts.model);
    const Dataset dataset = load_csv(opts.dataset);
    if (dataset.events.empty()) throw UsageError("dataset has no rows: " + opts.dataset);
    const Box box = dataset_box(model, dataset, opts.inflate);
    const Certificate cert =
        certify(model.net, opts.pairs, opts.points, box, opts.eps, opts.seed);
    if (!opts.output.empty()) save_certificate(cert, opts.output);
    return cert;
}

bool certificate_passes(const Certificate& cert) {
    const double budget = cert.lambda_budget;
    if (cert.lipschitz_product > budget * (1.0 + 1e-9)) return false;
    if (cert.empirical_lipschitz > budget * (1.0 + 1e-6)) return false;
    if (cert.monotone_applicable && !cert.monotone_ok) return false;
    return true;
}

AbsExperimentResult run_abs_experiment(const AbsExperimentOptions& opts) {
    AbsFitConfig cfg;
    cfg.depth = opts.depth;
    cfg.width = opts.width;
    cfg.lambda = opts.lambda;
    cfg.seed = opts.seed;
    cfg.epochs = opts.epochs;

    AbsExperimentResult result;
    cfg.activation = Activation::group_sort;
    result.group_sort_mse = abs_fit_experiment(cfg);
    cfg.activation = Activation::relu;
    result.relu_mse = abs_fit_experiment(cfg);

    if (!opts.output.empty()) {
        nlohmann::json j;
        j["depth"] = opts.depth;
        j["width"] = opts.width;
        j["lambda"] = opts.lambda;
        j["epochs"] = opts.epochs;
        j["seed"] = opts.seed;
        j["group_sort_mse"] = result.group_sort_mse;
        j["relu_mse"] = result.relu_mse;
        atomic_write_file(opts.output, j.dump(2) + "\n");
    }
    return result;
}

}  // namespace monolip
