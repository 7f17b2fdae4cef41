#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monolip/linalg.hpp"
#include "monolip/network.hpp"

namespace monolip {

/// Axis-aligned sampling domain; every side must have positive extent.
struct Box {
    Vector lo;
    Vector hi;

    void validate() const;
};

struct Certificate {
    double lipschitz_product = 0.0;   // product of effective layer norms
    double lambda_budget = 0.0;
    double empirical_lipschitz = 0.0; // max sampled difference ratio
    bool monotone_applicable = false;
    bool monotone_ok = false;
    double worst_partial = 0.0;       // min sampled d f / d x_i over monotone i
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

/// Exact product bound plus empirical estimation: pairs are sampled in the
/// box (half independent, half differing in a single coordinate, which probes
/// directional maxima under the 1-norm), mapped into g's coordinates, and the
/// largest |g(x)-g(y)| / |x-y|_1 ratio is recorded.
Certificate certify_lipschitz(const MonotonicNetwork& net, std::size_t num_pairs, const Box& box,
                              std::uint64_t seed);

struct MonotoneReport {
    bool ok = false;
    double worst_partial = 0.0;   // min over analytic and finite differences
    double worst_analytic = 0.0;
    double worst_finite_diff = 0.0;
    std::size_t samples = 0;
};

/// Evaluates analytic partials (reverse mode) and central finite differences
/// of f along every monotone input at sampled points; ok iff both stay above
/// -1e-9. eps is relative to the box extent per dimension. Throws when the
/// monotone index set is empty (nothing to certify - skip instead).
MonotoneReport certify_monotone(const MonotonicNetwork& net, std::size_t num_points,
                                const Box& box, double eps, std::uint64_t seed);

/// Lipschitz and (when applicable) monotonicity in one report.
Certificate certify(const MonotonicNetwork& net, std::size_t num_pairs, std::size_t num_points,
                    const Box& box, double eps, std::uint64_t seed);

/// Box spanning per-feature min/max of the rows, each side extended by
/// inflate/2 of the extent (0.5 probes 50% beyond the data).
Box bounding_box(const std::vector<Vector>& points, double inflate);

struct AbsFitConfig {
    Activation activation = Activation::group_sort;
    std::size_t depth = 3;
    std::size_t width = 16;
    double lambda = 1.0;
    std::uint64_t seed = 1;
    std::size_t epochs = 2000;
    std::size_t train_points = 1024;
    std::size_t test_points = 1024;
    bool linear_target = false;  // fit y = x instead of y = |x| (sanity case)
};

/// Trains a norm-constrained net on y = |x| over [-1, 1] (or y = x) for a
/// fixed budget and returns the held-out mean squared error.
double abs_fit_experiment(const AbsFitConfig& cfg);

/// Rank-based AUC (Mann-Whitney) with midrank tie handling.
double roc_auc(const std::vector<double>& signal_scores,
               const std::vector<double>& background_scores);

}  // namespace monolip
