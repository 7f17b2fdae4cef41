#include "monolip/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "monolip/constraints.hpp"
#include "monolip/random.hpp"

namespace monolip {

void NetworkSpec::validate() const {
    if (input_dim == 0) throw std::invalid_argument("input_dim must be positive");
    if (output_dim != 1) {
        throw std::invalid_argument("output_dim must be 1: the monotone wrapper is scalar-valued");
    }
    for (std::size_t w : hidden_widths) {
        if (w == 0) throw std::invalid_argument("hidden widths must be positive");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be a positive finite number");
    }
    if (activation == Activation::group_sort) {
        if (group_size == 0) throw std::invalid_argument("group_size must be positive");
        for (std::size_t w : hidden_widths) {
            if (w % group_size != 0) {
                throw std::invalid_argument("group_size " + std::to_string(group_size) +
                                            " does not divide hidden width " + std::to_string(w));
            }
        }
    }
    if (lambda_per_input) {
        if (lambda_per_input->size() != input_dim) {
            throw std::invalid_argument("lambda_per_input length must equal input_dim");
        }
        for (double li : *lambda_per_input) {
            if (!(li > 0.0) || !std::isfinite(li)) {
                throw std::invalid_argument("lambda_per_input entries must be positive and finite");
            }
        }
    }
    std::set<std::size_t> seen;
    for (std::size_t i : monotone_indices) {
        if (i >= input_dim) {
            throw std::invalid_argument("monotone index " + std::to_string(i) + " out of range");
        }
        if (!seen.insert(i).second) {
            throw std::invalid_argument("duplicate monotone index " + std::to_string(i));
        }
    }
}

double NetworkSpec::layer_budget() const {
    return std::pow(lambda, 1.0 / static_cast<double>(num_weight_layers()));
}

double NetworkSpec::lambda_for_input(std::size_t i) const {
    return lambda_per_input ? (*lambda_per_input)[i] : lambda;
}

bool NetworkSpec::is_monotone_index(std::size_t i) const {
    return std::find(monotone_indices.begin(), monotone_indices.end(), i) !=
           monotone_indices.end();
}

std::vector<std::size_t> layer_widths(const NetworkSpec& spec) {
    std::vector<std::size_t> widths;
    widths.reserve(spec.hidden_widths.size() + 2);
    widths.push_back(spec.input_dim);
    widths.insert(widths.end(), spec.hidden_widths.begin(), spec.hidden_widths.end());
    widths.push_back(spec.output_dim);
    return widths;
}

Vector group_sort(const Vector& v, std::size_t group_size) {
    if (group_size == 0 || v.size() % group_size != 0) {
        throw std::invalid_argument("group_size " + std::to_string(group_size) +
                                    " does not divide vector length " + std::to_string(v.size()));
    }
    Vector out = v;
    for (std::size_t start = 0; start < out.size(); start += group_size) {
        std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(start),
                         out.begin() + static_cast<std::ptrdiff_t>(start + group_size));
    }
    return out;
}

std::vector<std::uint32_t> group_sort_permutation(const Vector& v, std::size_t group_size) {
    if (group_size == 0 || v.size() % group_size != 0) {
        throw std::invalid_argument("group_size " + std::to_string(group_size) +
                                    " does not divide vector length " + std::to_string(v.size()));
    }
    std::vector<std::uint32_t> perm(v.size());
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t start = 0; start < v.size(); start += group_size) {
        std::stable_sort(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(start + group_size),
                         [&v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
    }
    return perm;
}

namespace {

Vector apply_activation(const NetworkSpec& spec, const Vector& preact) {
    if (spec.activation == Activation::group_sort) {
        return group_sort(preact, spec.group_size);
    }
    Vector out = preact;
    for (double& x : out) x = x > 0.0 ? x : 0.0;
    return out;
}

}  // namespace

MonotonicNetwork::MonotonicNetwork(NetworkSpec spec, std::vector<DenseLayer> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
    spec_.validate();
    const auto widths = layer_widths(spec_);
    if (layers_.size() != widths.size() - 1) {
        throw std::invalid_argument("expected " + std::to_string(widths.size() - 1) +
                                    " layers, got " + std::to_string(layers_.size()));
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& layer = layers_[i];
        if (layer.weights.rows() != widths[i + 1] || layer.weights.cols() != widths[i]) {
            throw std::invalid_argument("layer " + std::to_string(i) + " has shape " +
                                        std::to_string(layer.weights.rows()) + "x" +
                                        std::to_string(layer.weights.cols()) + ", expected " +
                                        std::to_string(widths[i + 1]) + "x" +
                                        std::to_string(widths[i]));
        }
        if (layer.bias.size() != widths[i + 1]) {
            throw std::invalid_argument("layer " + std::to_string(i) + " bias length mismatch");
        }
        if (!all_finite(layer.bias)) {
            throw std::invalid_argument("layer " + std::to_string(i) + " bias is not finite");
        }
    }
}

MonotonicNetwork MonotonicNetwork::initialize(const NetworkSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto widths = layer_widths(spec);
    std::vector<DenseLayer> layers;
    layers.reserve(widths.size() - 1);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const std::size_t rows = widths[i + 1];
        const std::size_t cols = widths[i];
        const double a = 1.0 / static_cast<double>(cols);
        Matrix w(rows, cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) w(r, c) = rng.uniform(-a, a);
        }
        layers.push_back(DenseLayer{std::move(w), Vector(rows, 0.0)});
    }
    MonotonicNetwork net(spec, std::move(layers));
    project_in_place(net);
    return net;
}

double MonotonicNetwork::base_value(const Vector& x) const {
    if (x.size() != spec_.input_dim) {
        throw std::invalid_argument("input length " + std::to_string(x.size()) +
                                    " does not match input_dim " +
                                    std::to_string(spec_.input_dim));
    }
    if (!all_finite(x)) throw std::invalid_argument("input is not finite");
    Vector z = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Vector preact = add(matvec(effective_weights(*this, i), z), layers_[i].bias);
        z = (i + 1 < layers_.size()) ? apply_activation(spec_, preact) : std::move(preact);
    }
    return z[0];
}

Vector MonotonicNetwork::rescaled_input(const Vector& x) const {
    if (!spec_.lambda_per_input) return x;
    Vector out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] * spec_.lambda_for_input(i) / spec_.lambda;
    }
    return out;
}

double MonotonicNetwork::residual_term(const Vector& x) const {
    double sum = 0.0;
    for (std::size_t i : spec_.monotone_indices) sum += spec_.lambda_for_input(i) * x[i];
    return sum;
}

double MonotonicNetwork::value(const Vector& x) const {
    if (x.size() != spec_.input_dim) {
        throw std::invalid_argument("input length " + std::to_string(x.size()) +
                                    " does not match input_dim " +
                                    std::to_string(spec_.input_dim));
    }
    return base_value(rescaled_input(x)) + residual_term(x);
}

}  // namespace monolip
