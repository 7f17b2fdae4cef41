#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "monolip/io.hpp"
#include "monolip/pipeline.hpp"

namespace {

using namespace monolip;

std::vector<std::pair<std::string, double>> parse_fixed_values(
    const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, double>> fixed;
    for (const auto& item : raw) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
            throw UsageError("--fix expects name=value, got '" + item + "'");
        }
        fixed.emplace_back(item.substr(0, eq), parse_double(item.substr(eq + 1)));
    }
    return fixed;
}

void print_certificate(const Certificate& cert) {
    std::cout << "lipschitz_product   " << format_double(cert.lipschitz_product) << "\n"
              << "lambda_budget       " << format_double(cert.lambda_budget) << "\n"
              << "empirical_lipschitz " << format_double(cert.empirical_lipschitz) << "\n";
    if (cert.monotone_applicable) {
        std::cout << "monotone_ok         " << (cert.monotone_ok ? "true" : "false") << "\n"
                  << "worst_partial       " << format_double(cert.worst_partial) << "\n";
    } else {
        std::cout << "monotone            not applicable (no monotone inputs)\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train and certify dense networks with a bounded Lipschitz constant and "
                 "built-in monotonicity, plus a synthetic decay-vertex trigger study"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Declarative options file; command-line flags win");
    app.allow_config_extras(false);

    GenerateOptions gen;
    auto* cmd_generate = app.add_subcommand("generate", "Write a synthetic decay-vertex dataset");
    cmd_generate->add_option("--count", gen.count, "Number of events")->capture_default_str();
    cmd_generate->add_option("--output", gen.output, "Output CSV path")->required();
    cmd_generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    cmd_generate->add_option("--signal-fraction", gen.fractions.signal, "Signal fraction")
        ->capture_default_str();
    cmd_generate->add_option("--prompt-fraction", gen.fractions.prompt, "Prompt background")
        ->capture_default_str();
    cmd_generate->add_option("--material-fraction", gen.fractions.material,
                             "Material-interaction background")
        ->capture_default_str();
    cmd_generate->add_option("--fake-fraction", gen.fractions.fake, "Fake-particle background")
        ->capture_default_str();
    cmd_generate->add_option("--lifetime-mean", gen.lifetime_mean_ps,
                             "Mean signal lifetime in ps")
        ->capture_default_str();

    TrainOptions tr;
    auto* cmd_train = app.add_subcommand("train", "Train a model and write model, history and "
                                                  "certificate files");
    cmd_train->add_option("--dataset", tr.dataset, "Training dataset CSV")->required();
    cmd_train->add_option("--model-out", tr.model_out, "Model output path")
        ->capture_default_str();
    cmd_train->add_option("--history-out", tr.history_out, "Training history CSV path");
    cmd_train->add_option("--certificate-out", tr.certificate_out, "Certificate JSON path");
    cmd_train->add_option("--features", tr.features, "Feature columns used as inputs")
        ->capture_default_str();
    cmd_train
        ->add_option("--monotone-features", tr.monotone_features,
                     "Features the response must be non-decreasing in")
        ->capture_default_str();
    cmd_train->add_option("--hidden", tr.hidden_widths, "Hidden layer widths")
        ->capture_default_str();
    cmd_train
        ->add_option("--group-size", tr.group_size,
                     "Sort group size; 0 picks the largest size dividing every hidden width")
        ->capture_default_str();
    cmd_train->add_option("--activation", tr.activation, "group_sort or relu")
        ->capture_default_str();
    cmd_train->add_option("--lambda", tr.lambda, "Lipschitz budget")->capture_default_str();
    cmd_train->add_option("--lambda-per-input", tr.lambda_per_input,
                          "Per-input budgets (one per feature)");
    cmd_train->add_option("--norm-scheme", tr.norm_scheme,
                          "variant_a, variant_b or column_wise")
        ->capture_default_str();
    cmd_train->add_option("--norm-mode", tr.norm_mode, "direct or project")
        ->capture_default_str();
    cmd_train->add_flag("--unconstrained", tr.unconstrained,
                        "Baseline preset: plain relu network, no constraints");
    cmd_train->add_option("--loss", tr.loss, "bce or mse")->capture_default_str();
    cmd_train->add_option("--optimizer", tr.optimizer, "adam or sgd")->capture_default_str();
    cmd_train->add_option("--learning-rate", tr.learning_rate, "Step size")
        ->capture_default_str();
    cmd_train->add_option("--beta1", tr.beta1, "Adam beta1")->capture_default_str();
    cmd_train->add_option("--beta2", tr.beta2, "Adam beta2")->capture_default_str();
    cmd_train->add_option("--epsilon", tr.epsilon, "Adam epsilon")->capture_default_str();
    cmd_train->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
    cmd_train->add_option("--batch-size", tr.batch_size, "Mini-batch size")
        ->capture_default_str();
    cmd_train->add_option("--val-fraction", tr.val_fraction, "Validation split fraction")
        ->capture_default_str();
    cmd_train->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
    cmd_train->add_option("--certify-pairs", tr.certify_pairs,
                          "Sampled pairs for the post-training certificate")
        ->capture_default_str();
    cmd_train->add_option("--certify-points", tr.certify_points,
                          "Sampled points for the monotonicity certificate")
        ->capture_default_str();

    ThresholdOptions th;
    auto* cmd_threshold = app.add_subcommand(
        "threshold", "Solve the response cut passing a given background fraction");
    cmd_threshold->add_option("--model", th.model, "Model JSON")->required();
    cmd_threshold->add_option("--dataset", th.dataset, "Dataset CSV")->required();
    cmd_threshold->add_option("--background-rate", th.background_rate,
                              "Background acceptance in (0, 1)")
        ->capture_default_str();
    cmd_threshold->add_option("--output", th.output, "Optional JSON output path");

    HeatmapOptions hm;
    std::vector<std::string> fix_raw;
    auto* cmd_heatmap =
        app.add_subcommand("heatmap", "Sweep the response over a 2-feature grid");
    cmd_heatmap->add_option("--model", hm.model, "Model JSON")->required();
    cmd_heatmap->add_option("--dataset", hm.dataset, "Dataset CSV for ranges and medians")
        ->required();
    cmd_heatmap->add_option("--feature-x", hm.feature_x, "X-axis feature")
        ->capture_default_str();
    cmd_heatmap->add_option("--feature-y", hm.feature_y, "Y-axis feature")
        ->capture_default_str();
    cmd_heatmap->add_option("--grid", hm.grid, "Grid points per axis")->capture_default_str();
    cmd_heatmap->add_option("--fix", fix_raw,
                            "name=value overrides for non-plotted features (default: medians)");
    cmd_heatmap->add_option("--output", hm.output, "Output CSV path")->required();

    EfficiencyOptions ef;
    auto* cmd_efficiency = app.add_subcommand(
        "efficiency", "Signal efficiency per true-lifetime bin at a fixed threshold");
    cmd_efficiency->add_option("--model", ef.model, "Model JSON")->required();
    cmd_efficiency->add_option("--dataset", ef.dataset, "Dataset CSV")->required();
    cmd_efficiency->add_option("--threshold", ef.threshold, "Response threshold")->required();
    cmd_efficiency->add_option("--bins", ef.bins, "Number of log-spaced lifetime bins")
        ->capture_default_str();
    cmd_efficiency->add_option("--lifetime-lo", ef.lifetime_lo_ps, "Lowest bin edge in ps")
        ->capture_default_str();
    cmd_efficiency->add_option("--lifetime-hi", ef.lifetime_hi_ps, "Highest bin edge in ps")
        ->capture_default_str();
    cmd_efficiency->add_option("--min-bin-count", ef.min_bin_count,
                               "Bins below this count are flagged low-stat")
        ->capture_default_str();
    cmd_efficiency->add_option("--output", ef.output, "Output CSV path")->required();

    CertifyOptions ce;
    auto* cmd_certify = app.add_subcommand(
        "certify", "Verify the Lipschitz bound and monotonicity of a trained model");
    cmd_certify->add_option("--model", ce.model, "Model JSON")->required();
    cmd_certify->add_option("--dataset", ce.dataset, "Dataset CSV defining the probed box")
        ->required();
    cmd_certify->add_option("--pairs", ce.pairs, "Sampled pairs for the Lipschitz estimate")
        ->capture_default_str();
    cmd_certify->add_option("--points", ce.points, "Sampled points for monotonicity")
        ->capture_default_str();
    cmd_certify->add_option("--eps", ce.eps, "Finite-difference step relative to the box")
        ->capture_default_str();
    cmd_certify->add_option("--inflate", ce.inflate, "Box inflation beyond the data extent")
        ->capture_default_str();
    cmd_certify->add_option("--seed", ce.seed, "Sampling seed")->capture_default_str();
    cmd_certify->add_option("--output", ce.output, "Certificate JSON output path");

    AbsExperimentOptions ab;
    auto* cmd_abs = app.add_subcommand(
        "abs-experiment", "Fit y=|x| with sort and relu activations under the same budget");
    cmd_abs->add_option("--depth", ab.depth, "Number of weight layers")->capture_default_str();
    cmd_abs->add_option("--width", ab.width, "Hidden width")->capture_default_str();
    cmd_abs->add_option("--lambda", ab.lambda, "Lipschitz budget")->capture_default_str();
    cmd_abs->add_option("--seed", ab.seed, "Random seed")->capture_default_str();
    cmd_abs->add_option("--epochs", ab.epochs, "Training epochs")->capture_default_str();
    cmd_abs->add_option("--output", ab.output, "Optional JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_generate->parsed()) {
            run_generate(gen);
            std::cout << "wrote " << gen.output << " (" << gen.count << " events)\n";
        } else if (cmd_train->parsed()) {
            const TrainSummary summary = run_train(tr);
            const auto& last = summary.history.back();
            std::cout << "final train loss " << format_double(last.train_loss);
            if (last.val_loss) std::cout << ", val loss " << format_double(*last.val_loss);
            std::cout << "\n";
            print_certificate(summary.certificate);
            std::cout << "wrote " << summary.model_path << "\n"
                      << "wrote " << summary.history_path << "\n"
                      << "wrote " << summary.certificate_path << "\n";
        } else if (cmd_threshold->parsed()) {
            std::cout << format_double(run_threshold(th)) << "\n";
        } else if (cmd_heatmap->parsed()) {
            hm.fixed_values = parse_fixed_values(fix_raw);
            run_heatmap(hm);
            std::cout << "wrote " << hm.output << "\n";
        } else if (cmd_efficiency->parsed()) {
            run_efficiency(ef);
            std::cout << "wrote " << ef.output << "\n";
        } else if (cmd_certify->parsed()) {
            const Certificate cert = run_certify(ce);
            print_certificate(cert);
            if (!ce.output.empty()) std::cout << "wrote " << ce.output << "\n";
            if (!certificate_passes(cert)) {
                std::cerr << "certificate FAILED its bounds\n";
                return 1;
            }
        } else if (cmd_abs->parsed()) {
            const AbsExperimentResult result = run_abs_experiment(ab);
            std::cout << "group_sort_mse " << format_double(result.group_sort_mse) << "\n"
                      << "relu_mse       " << format_double(result.relu_mse) << "\n";
            if (!ab.output.empty()) std::cout << "wrote " << ab.output << "\n";
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
