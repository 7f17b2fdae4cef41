// Acceptance suite: one line per criterion, nonzero exit on any failure.
// An optional numeric argument restricts the run to a single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "monolip/certify.hpp"
#include "monolip/constraints.hpp"
#include "monolip/data.hpp"
#include "monolip/io.hpp"
#include "monolip/pipeline.hpp"
#include "monolip/random.hpp"
#include "monolip/serialize.hpp"
#include "monolip/training.hpp"
#include "test_support.hpp"

using namespace monolip;

namespace {

struct Failures {
    std::ostringstream text;
    std::size_t count = 0;

    template <typename... Args>
    void require(bool condition, Args&&... context) {
        if (condition) return;
        ++count;
        if (count <= 8) {  // keep the report readable
            (text << ... << context) << "\n";
        }
    }
};

struct CriterionResult {
    int id = 0;
    std::string summary;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string format3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: product bound and empirical Lipschitz estimate across
// 50 random architectures, all schemes x modes, after 100 training steps

CriterionResult criterion_lipschitz() {
    Timer timer;
    Failures fail;
    Rng rng(20260801);
    constexpr std::size_t kSpecs = 50;
    constexpr std::size_t kPairs = 100000;
    double worst_product_ratio = 0.0;
    double worst_empirical_ratio = 0.0;

    for (std::size_t s = 0; s < kSpecs; ++s) {
        testsupport::SpecOptions opt;
        NetworkSpec spec = testsupport::random_spec(rng, opt);
        // sweep all scheme x mode combinations round-robin
        spec.norm_scheme = testsupport::scheme_of(s);
        spec.norm_mode = s % 2 == 0 ? NormMode::direct : NormMode::project;

        MonotonicNetwork net = MonotonicNetwork::initialize(spec);
        TrainingSet data;
        for (int i = 0; i < 256; ++i) {
            data.inputs.push_back(testsupport::random_input(rng, spec.input_dim, 1.5));
            data.targets.push_back(rng.uniform01() < 0.5 ? 1.0 : 0.0);
        }
        TrainConfig cfg;
        cfg.epochs = 25;
        cfg.batch_size = 64;  // 4 steps per epoch -> exactly 100 steps
        cfg.learning_rate = 0.02;  // aggressive on purpose: drive weights into the constraint
        cfg.seed = spec.seed;
        std::size_t steps = 0;
        train(net, data, cfg, nullptr,
              [&steps](const MonotonicNetwork&, std::size_t) { ++steps; });
        fail.require(steps == 100, "spec ", s, ": expected 100 steps, ran ", steps);

        const Box box{Vector(spec.input_dim, -1.5), Vector(spec.input_dim, 1.5)};
        const Certificate cert = certify_lipschitz(net, kPairs, box, spec.seed);
        const double product_ratio = cert.lipschitz_product / spec.lambda;
        const double empirical_ratio = cert.empirical_lipschitz / spec.lambda;
        worst_product_ratio = std::max(worst_product_ratio, product_ratio);
        worst_empirical_ratio = std::max(worst_empirical_ratio, empirical_ratio);
        fail.require(cert.lipschitz_product <= spec.lambda * (1.0 + 1e-9), "spec ", s,
                     ": product ", cert.lipschitz_product, " exceeds lambda ", spec.lambda);
        fail.require(cert.empirical_lipschitz <= spec.lambda * (1.0 + 1e-6), "spec ", s,
                     ": empirical ", cert.empirical_lipschitz, " exceeds lambda ", spec.lambda);
    }

    const double elapsed = timer.seconds();
    fail.require(elapsed < 300.0, "runtime ", elapsed, "s exceeds the 5 minute budget");

    CriterionResult result;
    result.id = 1;
    result.summary = "Lipschitz certificates for 50 random specs";
    result.pass = fail.count == 0;
    result.detail = "max product/budget " + format3(worst_product_ratio) +
                    ", max empirical/budget " + format3(worst_empirical_ratio);
    result.seconds = elapsed;
    if (!result.pass) result.detail += "\n" + fail.text.str();
    return result;
}

// ---------------------------------------------------------------------------
// criterion 2: monotonicity of 20 trained monotone models, analytic and
// finite-difference partials over 1e4 points each

CriterionResult criterion_monotonicity() {
    Timer timer;
    Failures fail;
    Rng rng(20260802);
    double worst = std::numeric_limits<double>::infinity();

    for (int m = 0; m < 20; ++m) {
        testsupport::SpecOptions opt;
        opt.force_monotone = true;
        opt.max_depth = 3;
        opt.max_width = 16;
        const NetworkSpec spec = testsupport::random_spec(rng, opt);
        MonotonicNetwork net = MonotonicNetwork::initialize(spec);

        TrainingSet data;
        for (int i = 0; i < 192; ++i) {
            const Vector x = testsupport::random_input(rng, spec.input_dim, 1.5);
            double score = 0.0;
            for (std::size_t k : spec.monotone_indices) score += x[k];
            data.inputs.push_back(x);
            data.targets.push_back(score + 0.3 * rng.normal() > 0.0 ? 1.0 : 0.0);
        }
        TrainConfig cfg;
        cfg.epochs = 16;
        cfg.batch_size = 48;
        cfg.seed = spec.seed;
        train(net, data, cfg);

        const Box box{Vector(spec.input_dim, -2.0), Vector(spec.input_dim, 2.0)};
        const MonotoneReport report = certify_monotone(net, 10000, box, 1e-4, spec.seed);
        worst = std::min({worst, report.worst_analytic, report.worst_finite_diff});
        fail.require(report.worst_analytic >= -1e-9, "model ", m, ": analytic partial ",
                     report.worst_analytic);
        fail.require(report.worst_finite_diff >= -1e-9, "model ", m, ": fd partial ",
                     report.worst_finite_diff);
    }

    CriterionResult result;
    result.id = 2;
    result.summary = "monotonicity certificates for 20 trained models";
    result.pass = fail.count == 0;
    result.detail = "worst partial " + format3(worst);
    result.seconds = timer.seconds();
    if (!result.pass) result.detail += "\n" + fail.text.str();
    return result;
}

// ---------------------------------------------------------------------------
// criterion 3: analytic gradients match central finite differences on
// 100 random configurations away from kinks

CriterionResult criterion_gradients() {
    Timer timer;
    Failures fail;
    Rng rng(20260803);
    double worst_rel = 0.0;
    int done = 0;
    int attempts = 0;
    while (done < 100 && attempts < 2000) {
        ++attempts;
        testsupport::SpecOptions opt;
        opt.max_depth = 3;
        opt.max_width = 8;
        const NetworkSpec spec = testsupport::random_spec(rng, opt);
        MonotonicNetwork net = testsupport::random_net(rng, spec, 1.2);
        const Vector x = testsupport::random_input(rng, spec.input_dim);
        if (testsupport::kink_margin(net, x) < 1e-4) continue;
        const auto check = testsupport::check_gradients(net, x);
        worst_rel = std::max(worst_rel, check.max_rel_err);
        fail.require(check.max_rel_err < 1e-5, "config ", done, ": relative error ",
                     check.max_rel_err);
        ++done;
    }
    fail.require(done == 100, "only ", done, " of 100 configurations away from kinks");

    const double elapsed = timer.seconds();
    fail.require(elapsed < 60.0, "runtime ", elapsed, "s exceeds the 1 minute budget");

    CriterionResult result;
    result.id = 3;
    result.summary = "gradient correctness on 100 random configurations";
    result.pass = fail.count == 0;
    result.detail = "max relative error " + format3(worst_rel);
    result.seconds = elapsed;
    if (!result.pass) result.detail += "\n" + fail.text.str();
    return result;
}

// ---------------------------------------------------------------------------
// criterion 4: the |x| expressiveness gap between sort and relu activations
// under a unit budget

CriterionResult criterion_expressiveness() {
    Timer timer;
    Failures fail;

    AbsFitConfig cfg;
    cfg.depth = 3;
    cfg.width = 16;
    cfg.lambda = 1.0;
    cfg.seed = 20260804;
    cfg.epochs = 2000;

    cfg.activation = Activation::group_sort;
    const double sort_mse = abs_fit_experiment(cfg);
    cfg.activation = Activation::relu;
    const double relu_mse = abs_fit_experiment(cfg);

    fail.require(sort_mse < 1e-4, "sort-activation mse ", sort_mse, " is not below 1e-4");
    fail.require(relu_mse >= 10.0 * sort_mse, "relu mse ", relu_mse,
                 " is not 10x the sort-activation mse ", sort_mse);

    const double elapsed = timer.seconds();
    fail.require(elapsed < 120.0, "runtime ", elapsed, "s exceeds the 2 minute budget");

    CriterionResult result;
    result.id = 4;
    result.summary = "|x| fit: sort succeeds where relu plateaus";
    result.pass = fail.count == 0;
    result.detail = "sort mse " + format3(sort_mse) + ", relu mse " + format3(relu_mse);
    result.seconds = elapsed;
    if (!result.pass) result.detail += "\n" + fail.text.str();
    return result;
}

// ---------------------------------------------------------------------------
// criterion 5: the synthetic trigger study - monotone heatmap axes and
// lifetime-stable efficiency, with the unconstrained baseline failing the
// latter

struct TriggerArtifacts {
    std::string dir;
    std::string dataset;
    std::string monotone_model;
    std::string baseline_model;
};

TriggerArtifacts build_trigger_artifacts(std::size_t events, std::size_t epochs,
                                         std::uint64_t seed) {
    TriggerArtifacts art;
    art.dir = (std::filesystem::temp_directory_path() /
               ("monolip_acceptance_" + std::to_string(::getpid())))
                  .string();
    std::filesystem::create_directories(art.dir);
    art.dataset = art.dir + "/events.csv";

    GenerateOptions gen;
    gen.count = events;
    gen.seed = seed;
    gen.output = art.dataset;
    run_generate(gen);

    TrainOptions tr;
    tr.dataset = art.dataset;
    tr.epochs = epochs;
    tr.batch_size = 256;
    tr.seed = seed;
    tr.certify_pairs = 20000;
    tr.certify_points = 4000;

    tr.model_out = art.dir + "/monotone.json";
    run_train(tr);
    art.monotone_model = tr.model_out;

    tr.unconstrained = true;
    tr.model_out = art.dir + "/baseline.json";
    run_train(tr);
    art.baseline_model = tr.model_out;
    return art;
}

double binomial_sigma(const EfficiencyBin& bin) {
    const double n = static_cast<double>(bin.n_signal);
    return std::sqrt(std::max(bin.efficiency * (1.0 - bin.efficiency), 1e-12) / n);
}

/// Pairs of consecutive usable bins above the lifetime floor; returns the
/// most negative drop in units of the combined binomial error.
double worst_drop_significance(const std::vector<EfficiencyBin>& bins, double lifetime_floor,
                               std::size_t min_count, double* worst_drop = nullptr) {
    double worst = 0.0;  // positive = drop
    if (worst_drop) *worst_drop = 0.0;
    for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
        const auto& lo = bins[b];
        const auto& hi = bins[b + 1];
        if (lo.lifetime_lo < lifetime_floor) continue;
        if (lo.n_signal < min_count || hi.n_signal < min_count) continue;
        const double drop = lo.efficiency - hi.efficiency;
        const double sigma = std::hypot(binomial_sigma(lo), binomial_sigma(hi));
        const double significance = drop / sigma;
        if (significance > worst) {
            worst = significance;
            if (worst_drop) *worst_drop = drop;
        }
    }
    return worst;
}

CriterionResult criterion_trigger_study() {
    Timer timer;
    Failures fail;

    const TriggerArtifacts art = build_trigger_artifacts(100000, 15, 20260805);
    const Dataset dataset = load_csv(art.dataset);
    const LoadedModel monotone = load_model(art.monotone_model);
    const LoadedModel baseline = load_model(art.baseline_model);

    // (a) heatmap grids non-decreasing along both monotone axes
    HeatmapOptions hm;
    hm.grid = 25;
    const HeatmapGrid grid = compute_heatmap(monotone, dataset, hm);
    std::size_t grid_violations = 0;
    for (std::size_t iy = 0; iy < grid.ys.size(); ++iy) {
        for (std::size_t ix = 0; ix + 1 < grid.xs.size(); ++ix) {
            if (grid.at(iy, ix + 1) < grid.at(iy, ix) - 1e-9) ++grid_violations;
        }
    }
    for (std::size_t ix = 0; ix < grid.xs.size(); ++ix) {
        for (std::size_t iy = 0; iy + 1 < grid.ys.size(); ++iy) {
            if (grid.at(iy + 1, ix) < grid.at(iy, ix) - 1e-9) ++grid_violations;
        }
    }
    fail.require(grid_violations == 0, "heatmap has ", grid_violations,
                 " non-monotone grid steps");

    // (b) efficiency versus lifetime at 10% background acceptance
    ThresholdOptions th;
    th.dataset = art.dataset;
    th.background_rate = 0.1;
    th.model = art.monotone_model;
    const double monotone_threshold = run_threshold(th);
    th.model = art.baseline_model;
    const double baseline_threshold = run_threshold(th);

    EfficiencyOptions ef;
    ef.threshold = monotone_threshold;
    const auto monotone_bins = compute_efficiency(monotone, dataset, ef);
    ef.threshold = baseline_threshold;
    const auto baseline_bins = compute_efficiency(baseline, dataset, ef);

    double monotone_drop = 0.0;
    const double monotone_sig =
        worst_drop_significance(monotone_bins, 2.0, 50, &monotone_drop);
    double baseline_drop = 0.0;
    const double baseline_sig =
        worst_drop_significance(baseline_bins, 2.0, 50, &baseline_drop);

    fail.require(monotone_sig <= 2.0, "monotone model drops ", monotone_drop, " (",
                 monotone_sig, " sigma) between high-lifetime bins");
    fail.require(baseline_sig > 2.0,
                 "baseline shows no significant efficiency drop at high lifetime (worst ",
                 baseline_sig, " sigma)");

    const double elapsed = timer.seconds();
    fail.require(elapsed < 600.0, "runtime ", elapsed, "s exceeds the 10 minute budget");

    std::error_code ec;
    std::filesystem::remove_all(art.dir, ec);

    CriterionResult result;
    result.id = 5;
    result.summary = "synthetic trigger study: monotone response, stable efficiency";
    result.pass = fail.count == 0;
    result.detail = "monotone worst drop " + format3(monotone_sig) + " sigma, baseline " +
                    format3(baseline_sig) + " sigma";
    result.seconds = elapsed;
    if (!result.pass) result.detail += "\n" + fail.text.str();
    return result;
}

// ---------------------------------------------------------------------------
// criterion 6: byte-identical retrains and sub-1% AUC spread across seeds

CriterionResult criterion_seed_stability() {
    Timer timer;
    Failures fail;

    const std::string dir = (std::filesystem::temp_directory_path() /
                             ("monolip_seeds_" + std::to_string(::getpid())))
                                .string();
    std::filesystem::create_directories(dir);
    const std::string dataset_path = dir + "/events.csv";
    GenerateOptions gen;
    gen.count = 50000;
    gen.seed = 20260806;
    gen.output = dataset_path;
    run_generate(gen);

    TrainOptions tr;
    tr.dataset = dataset_path;
    tr.epochs = 14;
    tr.batch_size = 256;
    tr.certify_pairs = 1000;
    tr.certify_points = 500;

    // identical seeds give identical bytes
    tr.seed = 7;
    tr.model_out = dir + "/a.json";
    run_train(tr);
    tr.model_out = dir + "/b.json";
    run_train(tr);
    fail.require(read_file(dir + "/a.json") == read_file(dir + "/b.json"),
                 "same-seed retrains differ");

    // AUC spread across 10 seeds, evaluated on the held-out split
    const Dataset dataset = load_csv(dataset_path);
    std::vector<double> aucs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        tr.seed = seed;
        tr.model_out = dir + "/seed" + std::to_string(seed) + ".json";
        run_train(tr);
        const LoadedModel model = load_model(tr.model_out);
        const auto [train_events, val_events] =
            split_dataset(dataset.events, tr.val_fraction, seed);
        std::vector<DvEvent> val_signal, val_background;
        for (const auto& e : val_events) {
            (e.is_signal ? val_signal : val_background).push_back(e);
        }
        const double auc = roc_auc(model_responses(model, val_signal),
                                   model_responses(model, val_background));
        aucs.push_back(auc);
    }
    double mean = 0.0;
    for (double a : aucs) mean += a;
    mean /= static_cast<double>(aucs.size());
    double var = 0.0;
    for (double a : aucs) var += (a - mean) * (a - mean);
    const double std_dev = std::sqrt(var / static_cast<double>(aucs.size()));
    fail.require(std_dev < 0.01, "AUC standard deviation ", std_dev, " is not below 1%");
    fail.require(mean > 0.8, "mean AUC ", mean, " suspiciously low for the trigger study");

    std::error_code ec;
    std::filesystem::remove_all(dir, ec);

    CriterionResult result;
    result.id = 6;
    result.summary = "determinism and seed stability";
    result.pass = fail.count == 0;
    result.detail = "mean AUC " + format3(mean) + ", spread " + format3(std_dev);
    result.seconds = timer.seconds();
    if (!result.pass) result.detail += "\n" + fail.text.str();
    return result;
}

// ---------------------------------------------------------------------------
// criterion 7: projection idempotence and feasibility after every step

CriterionResult criterion_projection() {
    Timer timer;
    Failures fail;
    Rng rng(20260807);

    // idempotence to 1e-15 on random networks of every scheme
    double worst_second_change = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        NetworkSpec spec = testsupport::random_spec(rng);
        spec.norm_mode = NormMode::project;
        MonotonicNetwork net = testsupport::random_net(rng, spec, 2.0);
        project_in_place(net);
        const auto first = net.layers();
        project_in_place(net);
        for (std::size_t i = 0; i < first.size(); ++i) {
            const auto& a = first[i].weights.data();
            const auto& b = net.layers()[i].weights.data();
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double change = std::abs(b[k] - a[k]) / std::max(1.0, std::abs(a[k]));
                worst_second_change = std::max(worst_second_change, change);
                fail.require(change <= 1e-15, "trial ", trial, ": reprojection moved a weight by ",
                             change);
            }
        }
        const double budget = spec.layer_budget();
        for (const auto& layer : net.layers()) {
            fail.require(one_norm(layer.weights) <= budget + 1e-12, "trial ", trial,
                         ": infeasible after projection");
        }
    }

    // feasibility at every optimizer step, each scheme
    for (std::size_t scheme_index = 0; scheme_index < 3; ++scheme_index) {
        testsupport::SpecOptions opt;
        opt.max_depth = 3;
        opt.max_width = 16;
        NetworkSpec spec = testsupport::random_spec(rng, opt);
        spec.norm_scheme = testsupport::scheme_of(scheme_index);
        spec.norm_mode = NormMode::project;
        MonotonicNetwork net = MonotonicNetwork::initialize(spec);

        TrainingSet data;
        for (int i = 0; i < 256; ++i) {
            data.inputs.push_back(testsupport::random_input(rng, spec.input_dim, 1.5));
            data.targets.push_back(rng.uniform01() < 0.5 ? 1.0 : 0.0);
        }
        TrainConfig cfg;
        cfg.epochs = 5;
        cfg.batch_size = 32;
        cfg.learning_rate = 0.01;  // large enough to leave the feasible set each step
        cfg.seed = spec.seed;
        const double budget = spec.layer_budget();
        std::size_t steps = 0;
        train(net, data, cfg, nullptr,
              [&](const MonotonicNetwork& snapshot, std::size_t) {
                  ++steps;
                  for (const auto& layer : snapshot.layers()) {
                      fail.require(one_norm(layer.weights) <= budget + 1e-12,
                                   "scheme ", scheme_index, ": infeasible checkpoint at step ",
                                   steps);
                  }
              });
        fail.require(steps == 5 * 8, "scheme ", scheme_index, ": expected 40 steps, ran ",
                     steps);
    }

    CriterionResult result;
    result.id = 7;
    result.summary = "projection idempotence and per-step feasibility";
    result.pass = fail.count == 0;
    result.detail = "max reprojection change " + format3(worst_second_change);
    result.seconds = timer.seconds();
    if (!result.pass) result.detail += "\n" + fail.text.str();
    return result;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    std::vector<CriterionResult (*)()> criteria = {
        criterion_lipschitz,     criterion_monotonicity,   criterion_gradients,
        criterion_expressiveness, criterion_trigger_study, criterion_seed_stability,
        criterion_projection,
    };

    bool all_pass = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (only != 0 && only != id) continue;
        const CriterionResult result = criteria[i]();
        all_pass = all_pass && result.pass;
        std::printf("[%s] criterion %d: %s (%s; %.1fs)\n", result.pass ? "PASS" : "FAIL",
                    result.id, result.summary.c_str(), result.detail.c_str(), result.seconds);
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
