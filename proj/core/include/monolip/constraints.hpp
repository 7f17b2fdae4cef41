#pragma once

#include <cstddef>
#include <vector>

#include "monolip/linalg.hpp"
#include "monolip/network.hpp"

namespace monolip {

/// W' = lambda^(1/m) * W / max(1, |W|_1).
Matrix effective_weights_variant_a(const Matrix& w, double lambda, std::size_t m);

/// W' = W / max(1, lambda^(-1/m) * |W|_1). Unchanged (bitwise) while the
/// constraint is inactive.
Matrix effective_weights_variant_b(const Matrix& w, double lambda, std::size_t m);

/// Column k scaled by 1 / max(1, lambda^(-1/m) * colsum_k). Columns already
/// inside the budget are untouched.
Matrix effective_weights_colwise(const Matrix& w, double lambda, std::size_t m);

/// The matrix actually multiplied by in the forward pass: scheme-normalized
/// raw weights in direct mode, raw weights as-is in project mode.
Matrix effective_weights(const MonotonicNetwork& net, std::size_t layer_index);

/// Pulls every layer back into the feasible set {per-layer 1-norm <=
/// lambda^(1/m)}: whole-matrix radial scaling for variant_a/variant_b,
/// per-column scaling for column_wise. Feasible layers are left bitwise
/// untouched, which also makes the operation idempotent.
void project_in_place(MonotonicNetwork& net);

/// Product over layers of one_norm(effective weights).
double lipschitz_product(const MonotonicNetwork& net);

/// Branch state captured while computing effective weights, enough to chain
/// gradients from effective back to raw weights in direct mode.
struct NormBranch {
    // variant_a / variant_b
    bool whole_active = false;
    double whole_scale = 1.0;
    double whole_norm = 0.0;
    std::size_t argmax_col = 0;
    // column_wise
    std::vector<double> col_scale;
    std::vector<double> col_sum;
    std::vector<char> col_active;
};

Matrix effective_weights_recorded(const MonotonicNetwork& net, std::size_t layer_index,
                                  NormBranch& branch);

/// Chain rule from d(effective W) to d(raw W) for the recorded branch.
/// Identity in project mode.
Matrix normalization_backward(const MonotonicNetwork& net, std::size_t layer_index,
                              const NormBranch& branch, const Matrix& d_effective);

}  // namespace monolip
