#include "monolip/constraints.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace monolip {

namespace {

Matrix scaled(const Matrix& w, double s) {
    Matrix out = w;
    for (double& x : out.data()) x *= s;
    return out;
}

std::size_t argmax_column(const Vector& col_sums) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < col_sums.size(); ++k) {
        // strict comparison: ties resolve to the lowest column index
        if (col_sums[k] > col_sums[best]) best = k;
    }
    return best;
}

void check_layer_index(const MonotonicNetwork& net, std::size_t layer_index) {
    if (layer_index >= net.layers().size()) {
        throw std::out_of_range("layer index " + std::to_string(layer_index) +
                                " out of range (network has " +
                                std::to_string(net.layers().size()) + " layers)");
    }
}

}  // namespace

Matrix effective_weights_variant_a(const Matrix& w, double lambda, std::size_t m) {
    const double c = std::pow(lambda, 1.0 / static_cast<double>(m));
    const double n = one_norm(w);
    return scaled(w, c / std::max(1.0, n));
}

Matrix effective_weights_variant_b(const Matrix& w, double lambda, std::size_t m) {
    const double inv_budget = std::pow(lambda, -1.0 / static_cast<double>(m));
    const double n = one_norm(w);
    if (inv_budget * n <= 1.0) return w;
    return scaled(w, 1.0 / (inv_budget * n));
}

Matrix effective_weights_colwise(const Matrix& w, double lambda, std::size_t m) {
    const double inv_budget = std::pow(lambda, -1.0 / static_cast<double>(m));
    const Vector sums = column_abs_sums(w);
    Vector scales(sums.size(), 1.0);
    bool any_active = false;
    for (std::size_t k = 0; k < sums.size(); ++k) {
        const double scaled_sum = inv_budget * sums[k];
        if (scaled_sum > 1.0) {
            scales[k] = 1.0 / scaled_sum;
            any_active = true;
        }
    }
    if (!any_active) return w;
    return scale_columns(w, scales);
}

Matrix effective_weights(const MonotonicNetwork& net, std::size_t layer_index) {
    check_layer_index(net, layer_index);
    const auto& spec = net.spec();
    const Matrix& raw = net.layers()[layer_index].weights;
    if (spec.norm_mode == NormMode::project) return raw;
    const std::size_t m = spec.num_weight_layers();
    switch (spec.norm_scheme) {
        case NormScheme::variant_a:
            return effective_weights_variant_a(raw, spec.lambda, m);
        case NormScheme::variant_b:
            return effective_weights_variant_b(raw, spec.lambda, m);
        case NormScheme::column_wise:
            return effective_weights_colwise(raw, spec.lambda, m);
    }
    throw std::logic_error("unreachable norm scheme");
}

Matrix effective_weights_recorded(const MonotonicNetwork& net, std::size_t layer_index,
                                  NormBranch& branch) {
    check_layer_index(net, layer_index);
    branch = NormBranch{};
    const auto& spec = net.spec();
    const Matrix& raw = net.layers()[layer_index].weights;
    if (spec.norm_mode == NormMode::project) return raw;
    // scales computed with exactly the same expressions as the plain
    // effective_weights_* functions so both paths agree bit for bit
    const std::size_t m = spec.num_weight_layers();
    const double inv_budget = std::pow(spec.lambda, -1.0 / static_cast<double>(m));

    if (spec.norm_scheme == NormScheme::column_wise) {
        branch.col_sum = column_abs_sums(raw);
        branch.col_scale.assign(branch.col_sum.size(), 1.0);
        branch.col_active.assign(branch.col_sum.size(), 0);
        bool any_active = false;
        for (std::size_t k = 0; k < branch.col_sum.size(); ++k) {
            const double scaled_sum = inv_budget * branch.col_sum[k];
            if (scaled_sum > 1.0) {
                branch.col_scale[k] = 1.0 / scaled_sum;
                branch.col_active[k] = 1;
                any_active = true;
            }
        }
        if (!any_active) return raw;
        return scale_columns(raw, branch.col_scale);
    }

    const Vector sums = column_abs_sums(raw);
    branch.argmax_col = argmax_column(sums);
    branch.whole_norm = sums[branch.argmax_col];
    if (spec.norm_scheme == NormScheme::variant_a) {
        const double c = std::pow(spec.lambda, 1.0 / static_cast<double>(m));
        branch.whole_active = branch.whole_norm > 1.0;
        branch.whole_scale = c / std::max(1.0, branch.whole_norm);
        return scaled(raw, branch.whole_scale);
    }
    // variant_b
    branch.whole_active = inv_budget * branch.whole_norm > 1.0;
    if (!branch.whole_active) {
        branch.whole_scale = 1.0;
        return raw;
    }
    branch.whole_scale = 1.0 / (inv_budget * branch.whole_norm);
    return scaled(raw, branch.whole_scale);
}

Matrix normalization_backward(const MonotonicNetwork& net, std::size_t layer_index,
                              const NormBranch& branch, const Matrix& d_effective) {
    check_layer_index(net, layer_index);
    const auto& spec = net.spec();
    if (spec.norm_mode == NormMode::project) return d_effective;
    const Matrix& raw = net.layers()[layer_index].weights;

    if (spec.norm_scheme == NormScheme::column_wise) {
        Matrix grad = d_effective;
        for (std::size_t k = 0; k < raw.cols(); ++k) {
            if (!branch.col_active[k]) continue;
            const double s = branch.col_scale[k];
            double inner = 0.0;
            for (std::size_t j = 0; j < raw.rows(); ++j) {
                inner += d_effective(j, k) * raw(j, k);
            }
            const double correction = s / branch.col_sum[k] * inner;
            for (std::size_t j = 0; j < raw.rows(); ++j) {
                const double sign = raw(j, k) > 0.0 ? 1.0 : (raw(j, k) < 0.0 ? -1.0 : 0.0);
                grad(j, k) = s * d_effective(j, k) - correction * sign;
            }
        }
        return grad;
    }

    // Whole-matrix schemes: effective = s * raw with s constant on the
    // inactive branch and s = budget / |raw|_1 on the active one, where the
    // norm depends on the argmax column only.
    Matrix grad(raw.rows(), raw.cols(), 0.0);
    const double s = branch.whole_scale;
    for (std::size_t i = 0; i < grad.data().size(); ++i) {
        grad.data()[i] = s * d_effective.data()[i];
    }
    if (branch.whole_active) {
        const double inner = frobenius_inner(d_effective, raw);
        const double correction = s / branch.whole_norm * inner;
        const std::size_t k = branch.argmax_col;
        for (std::size_t j = 0; j < raw.rows(); ++j) {
            const double sign = raw(j, k) > 0.0 ? 1.0 : (raw(j, k) < 0.0 ? -1.0 : 0.0);
            grad(j, k) -= correction * sign;
        }
    }
    return grad;
}

void project_in_place(MonotonicNetwork& net) {
    const auto& spec = net.spec();
    const double budget = spec.layer_budget();
    auto& layers = net.mutable_layers();
    for (auto& layer : layers) {
        Matrix& w = layer.weights;
        if (spec.norm_scheme == NormScheme::column_wise) {
            const Vector sums = column_abs_sums(w);
            for (std::size_t k = 0; k < w.cols(); ++k) {
                if (sums[k] <= budget) continue;
                const double s = budget / sums[k];
                for (std::size_t j = 0; j < w.rows(); ++j) w(j, k) *= s;
            }
        } else {
            const double n = one_norm(w);
            if (n <= budget) continue;
            const double s = budget / n;
            for (double& x : w.data()) x *= s;
        }
    }
}

double lipschitz_product(const MonotonicNetwork& net) {
    double product = 1.0;
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        product *= one_norm(effective_weights(net, i));
    }
    return product;
}

}  // namespace monolip
