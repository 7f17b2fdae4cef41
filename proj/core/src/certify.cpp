#include "monolip/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "monolip/constraints.hpp"
#include "monolip/random.hpp"
#include "monolip/training.hpp"

namespace monolip {

void Box::validate() const {
    if (lo.empty() || lo.size() != hi.size()) {
        throw std::invalid_argument("box bounds must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
            throw std::invalid_argument("box bounds must be finite");
        }
        if (!(hi[i] > lo[i])) {
            throw std::invalid_argument("box is degenerate: dimension " + std::to_string(i) +
                                        " has zero extent");
        }
    }
}

namespace {

Vector sample_point(Rng& rng, const Box& box) {
    Vector x(box.lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    return x;
}

}  // namespace

Certificate certify_lipschitz(const MonotonicNetwork& net, std::size_t num_pairs, const Box& box,
                              std::uint64_t seed) {
    box.validate();
    if (num_pairs == 0) throw std::invalid_argument("num_pairs must be positive");
    if (box.lo.size() != net.spec().input_dim) {
        throw std::invalid_argument("box dimension does not match network input_dim");
    }

    const EffectiveState eff = compute_effective(net);
    Certificate cert;
    cert.lambda_budget = net.spec().lambda;
    cert.samples = num_pairs;
    cert.seed = seed;
    cert.lipschitz_product = 1.0;
    for (const auto& w : eff.weights) cert.lipschitz_product *= one_norm(w);

    Rng rng(mix_seed(seed, 0x11u));
    const std::size_t dim = box.lo.size();
    double max_ratio = 0.0;
    for (std::size_t p = 0; p < num_pairs; ++p) {
        Vector x = sample_point(rng, box);
        Vector y;
        if (p % 2 == 0) {
            y = sample_point(rng, box);
        } else {
            // coordinate-aligned pair: same point except one dimension
            y = x;
            const std::size_t d = (p / 2) % dim;
            y[d] = rng.uniform(box.lo[d], box.hi[d]);
        }
        const Vector xs = net.rescaled_input(x);
        const Vector ys = net.rescaled_input(y);
        double dist = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dist += std::abs(xs[i] - ys[i]);
        if (dist < 1e-300) continue;
        const double gx = forward_base_value(net, eff, xs);
        const double gy = forward_base_value(net, eff, ys);
        const double ratio = std::abs(gx - gy) / dist;
        if (ratio > max_ratio) max_ratio = ratio;
    }
    cert.empirical_lipschitz = max_ratio;
    return cert;
}

MonotoneReport certify_monotone(const MonotonicNetwork& net, std::size_t num_points,
                                const Box& box, double eps, std::uint64_t seed) {
    box.validate();
    if (num_points == 0) throw std::invalid_argument("num_points must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (box.lo.size() != net.spec().input_dim) {
        throw std::invalid_argument("box dimension does not match network input_dim");
    }
    const auto& indices = net.spec().monotone_indices;
    if (indices.empty()) {
        throw std::invalid_argument(
            "monotone index set is empty; monotonicity certification does not apply - skip it");
    }

    const EffectiveState eff = compute_effective(net);
    Rng rng(mix_seed(seed, 0x22u));
    MonotoneReport report;
    report.samples = num_points;
    double worst_analytic = std::numeric_limits<double>::infinity();
    double worst_fd = std::numeric_limits<double>::infinity();
    Tape tape;
    for (std::size_t p = 0; p < num_points; ++p) {
        const Vector x = sample_point(rng, box);
        forward_recorded(net, eff, x, tape);
        const Gradients grads = backward(net, eff, tape, 1.0);
        for (std::size_t i : indices) {
            worst_analytic = std::min(worst_analytic, grads.input[i]);
            const double h = eps * (box.hi[i] - box.lo[i]);
            Vector xp = x;
            Vector xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd =
                (forward_value(net, eff, xp) - forward_value(net, eff, xm)) / (2.0 * h);
            worst_fd = std::min(worst_fd, fd);
        }
    }
    report.worst_analytic = worst_analytic;
    report.worst_finite_diff = worst_fd;
    report.worst_partial = std::min(worst_analytic, worst_fd);
    report.ok = report.worst_partial >= -1e-9;
    return report;
}

Certificate certify(const MonotonicNetwork& net, std::size_t num_pairs, std::size_t num_points,
                    const Box& box, double eps, std::uint64_t seed) {
    Certificate cert = certify_lipschitz(net, num_pairs, box, seed);
    if (net.spec().monotone_indices.empty()) {
        cert.monotone_applicable = false;
        cert.monotone_ok = true;  // vacuously; flagged not applicable
        cert.worst_partial = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }
    const MonotoneReport report = certify_monotone(net, num_points, box, eps, seed);
    cert.monotone_applicable = true;
    cert.monotone_ok = report.ok;
    cert.worst_partial = report.worst_partial;
    return cert;
}

Box bounding_box(const std::vector<Vector>& points, double inflate) {
    if (points.empty()) throw std::invalid_argument("cannot bound an empty point set");
    const std::size_t dim = points.front().size();
    Box box;
    box.lo.assign(dim, std::numeric_limits<double>::infinity());
    box.hi.assign(dim, -std::numeric_limits<double>::infinity());
    for (const auto& p : points) {
        if (p.size() != dim) throw std::invalid_argument("inconsistent point dimensions");
        for (std::size_t i = 0; i < dim; ++i) {
            box.lo[i] = std::min(box.lo[i], p[i]);
            box.hi[i] = std::max(box.hi[i], p[i]);
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        double extent = box.hi[i] - box.lo[i];
        if (extent <= 0.0) extent = 1.0;  // constant feature: give the box some width
        box.lo[i] -= 0.5 * inflate * extent;
        box.hi[i] += 0.5 * inflate * extent;
    }
    box.validate();
    return box;
}

double abs_fit_experiment(const AbsFitConfig& cfg) {
    if (cfg.depth == 0) throw std::invalid_argument("depth must be positive");
    NetworkSpec spec;
    spec.input_dim = 1;
    spec.hidden_widths.assign(cfg.depth - 1, cfg.width);
    spec.activation = cfg.activation;
    spec.group_size = cfg.width;  // full sort within each hidden layer
    spec.lambda = cfg.lambda;
    spec.norm_scheme = NormScheme::column_wise;
    spec.norm_mode = NormMode::direct;
    spec.seed = cfg.seed;

    Rng rng(mix_seed(cfg.seed, 0x33u));
    const auto target = [&cfg](double x) { return cfg.linear_target ? x : std::abs(x); };
    TrainingSet train_set;
    train_set.inputs.reserve(cfg.train_points);
    for (std::size_t i = 0; i < cfg.train_points; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        train_set.inputs.push_back(Vector{x});
        train_set.targets.push_back(target(x));
    }

    MonotonicNetwork net = MonotonicNetwork::initialize(spec);
    TrainConfig tc;
    tc.loss = LossKind::mse;
    tc.optimizer = OptimizerKind::adam;
    tc.epochs = cfg.epochs;
    tc.batch_size = 64;
    tc.seed = cfg.seed;
    train(net, train_set, tc);

    Rng test_rng(mix_seed(cfg.seed, 0x34u));
    const EffectiveState eff = compute_effective(net);
    double mse = 0.0;
    for (std::size_t i = 0; i < cfg.test_points; ++i) {
        const double x = test_rng.uniform(-1.0, 1.0);
        const double err = forward_value(net, eff, Vector{x}) - target(x);
        mse += err * err;
    }
    return mse / static_cast<double>(cfg.test_points);
}

double roc_auc(const std::vector<double>& signal_scores,
               const std::vector<double>& background_scores) {
    if (signal_scores.empty() || background_scores.empty()) {
        throw std::invalid_argument("roc_auc needs both signal and background scores");
    }
    struct Scored {
        double score;
        bool is_signal;
    };
    std::vector<Scored> all;
    all.reserve(signal_scores.size() + background_scores.size());
    for (double s : signal_scores) all.push_back({s, true});
    for (double s : background_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(),
              [](const Scored& a, const Scored& b) { return a.score < b.score; });

    // midranks over tied blocks
    double rank_sum_signal = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].is_signal) rank_sum_signal += midrank;
        }
        i = j;
    }
    const double ns = static_cast<double>(signal_scores.size());
    const double nb = static_cast<double>(background_scores.size());
    return (rank_sum_signal - ns * (ns + 1.0) / 2.0) / (ns * nb);
}

}  // namespace monolip
