#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "monolip/linalg.hpp"

namespace monolip {

enum class Activation { group_sort, relu };

/// How the per-layer 1-norm budget lambda^(1/m) is realized.
///   variant_a:   W' = lambda^(1/m) * W / max(1, |W|_1)
///   variant_b:   W' = W / max(1, lambda^(-1/m) * |W|_1)
///   column_wise: each column scaled by 1 / max(1, lambda^(-1/m) * colsum)
enum class NormScheme { variant_a, variant_b, column_wise };

/// direct: normalization is part of the forward pass and its gradient flows
/// into training. project: raw weights are pulled back into the feasible set
/// after every optimizer step and used as-is in the forward pass.
enum class NormMode { direct, project };

struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_widths;
    std::size_t output_dim = 1;
    Activation activation = Activation::group_sort;
    std::size_t group_size = 1;  // ignored for relu
    double lambda = 1.0;
    std::optional<Vector> lambda_per_input;
    std::vector<std::size_t> monotone_indices;
    NormScheme norm_scheme = NormScheme::column_wise;
    NormMode norm_mode = NormMode::direct;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on any violated constraint.
    void validate() const;

    /// Number of weight layers m (hidden count + output layer).
    std::size_t num_weight_layers() const { return hidden_widths.size() + 1; }

    /// Per-layer 1-norm budget lambda^(1/m).
    double layer_budget() const;

    /// Directional budget for input i: lambda_per_input[i] when present,
    /// otherwise the global lambda.
    double lambda_for_input(std::size_t i) const;

    bool is_monotone_index(std::size_t i) const;

    bool operator==(const NetworkSpec&) const = default;
};

struct DenseLayer {
    Matrix weights;
    Vector bias;

    bool operator==(const DenseLayer&) const = default;
};

/// Sorts each contiguous block of group_size elements ascending. Ties keep
/// their original order so the induced permutation is deterministic.
Vector group_sort(const Vector& v, std::size_t group_size);

/// Permutation realizing group_sort: out[p] = v[perm[p]].
std::vector<std::uint32_t> group_sort_permutation(const Vector& v, std::size_t group_size);

/// A Lipschitz-bounded dense network g plus the additive monotone residual:
///
///   value(x) = g(rescaled x) + sum over monotone inputs i of lambda_i * x_i
///
/// base_value evaluates g alone on an input already in g's coordinate system.
/// With per-input budgets absent, the coordinate systems coincide.
///
/// Raw weights are what training updates; the effective weights of the
/// active normalization scheme are what the forward pass multiplies by (in
/// project mode the two are identical because projection keeps raw weights
/// feasible). Mutation goes through mutable_layers(), which bumps a revision
/// counter so recorded tapes can detect staleness.
class MonotonicNetwork {
public:
    MonotonicNetwork(NetworkSpec spec, std::vector<DenseLayer> layers);

    /// Deterministic random initialization followed by one projection so the
    /// starting point is feasible.
    static MonotonicNetwork initialize(const NetworkSpec& spec);

    const NetworkSpec& spec() const noexcept { return spec_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& mutable_layers() {
        ++revision_;
        return layers_;
    }
    std::uint64_t revision() const noexcept { return revision_; }

    /// g(x), x given in g's (rescaled) coordinates.
    double base_value(const Vector& x) const;

    /// Full model output f(x) on raw inputs.
    double value(const Vector& x) const;

    /// Input rescaling realizing per-input budgets: x_i * lambda_i / lambda.
    Vector rescaled_input(const Vector& x) const;

    /// Sum over monotone indices of lambda_i * x_i.
    double residual_term(const Vector& x) const;

private:
    NetworkSpec spec_;
    std::vector<DenseLayer> layers_;
    std::uint64_t revision_ = 0;
};

/// Layer widths including input and output: {n, h1, ..., hk, out}.
std::vector<std::size_t> layer_widths(const NetworkSpec& spec);

}  // namespace monolip
