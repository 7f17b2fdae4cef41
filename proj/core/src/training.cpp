#include "monolip/training.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "monolip/io.hpp"
#include "monolip/random.hpp"

namespace monolip {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be finite and non-negative");
    }
    if (optimizer == OptimizerKind::adam) {
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
            throw std::invalid_argument("adam betas must lie in (0, 1)");
        }
        if (!(epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
    }
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
}

double loss_bce_with_logit(double logit, double label) {
    // max(z,0) - z*y + log(1 + exp(-|z|))
    return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

double loss_mse(double prediction, double target) {
    const double d = prediction - target;
    return d * d;
}

double loss_value(LossKind kind, double output, double target) {
    return kind == LossKind::bce_with_logit ? loss_bce_with_logit(output, target)
                                            : loss_mse(output, target);
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double loss_gradient(LossKind kind, double output, double target) {
    return kind == LossKind::bce_with_logit ? sigmoid(output) - target
                                            : 2.0 * (output - target);
}

EffectiveState compute_effective(const MonotonicNetwork& net) {
    EffectiveState state;
    state.revision = net.revision();
    state.weights.reserve(net.layers().size());
    state.branches.resize(net.layers().size());
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        state.weights.push_back(effective_weights_recorded(net, i, state.branches[i]));
    }
    return state;
}

namespace {

void check_fresh(const MonotonicNetwork& net, std::uint64_t revision, const char* what) {
    if (revision != net.revision()) {
        throw std::logic_error(std::string(what) +
                               " is stale: parameters changed since it was computed");
    }
}

Vector relu(const Vector& v) {
    Vector out = v;
    for (double& x : out) x = x > 0.0 ? x : 0.0;
    return out;
}

double forward_base_impl(const MonotonicNetwork& net, const EffectiveState& eff, const Vector& z0,
                         Tape* tape) {
    const auto& spec = net.spec();
    const std::size_t num_layers = net.layers().size();
    Vector z = z0;
    if (tape) {
        tape->layer_inputs.clear();
        tape->preactivations.clear();
        tape->sort_perms.clear();
    }
    for (std::size_t i = 0; i < num_layers; ++i) {
        if (tape) tape->layer_inputs.push_back(z);
        Vector preact = add(matvec(eff.weights[i], z), net.layers()[i].bias);
        if (tape) tape->preactivations.push_back(preact);
        if (i + 1 == num_layers) {
            z = std::move(preact);
        } else if (spec.activation == Activation::group_sort) {
            auto perm = group_sort_permutation(preact, spec.group_size);
            Vector sorted(preact.size());
            for (std::size_t p = 0; p < perm.size(); ++p) sorted[p] = preact[perm[p]];
            if (tape) tape->sort_perms.push_back(std::move(perm));
            z = std::move(sorted);
        } else {
            z = relu(preact);
        }
    }
    return z[0];
}

}  // namespace

double forward_base_value(const MonotonicNetwork& net, const EffectiveState& eff,
                          const Vector& z) {
    check_fresh(net, eff.revision, "effective state");
    if (z.size() != net.spec().input_dim) {
        throw std::invalid_argument("input length does not match input_dim");
    }
    return forward_base_impl(net, eff, z, nullptr);
}

double forward_value(const MonotonicNetwork& net, const EffectiveState& eff, const Vector& x) {
    check_fresh(net, eff.revision, "effective state");
    if (x.size() != net.spec().input_dim) {
        throw std::invalid_argument("input length does not match input_dim");
    }
    return forward_base_impl(net, eff, net.rescaled_input(x), nullptr) + net.residual_term(x);
}

double forward_recorded(const MonotonicNetwork& net, const EffectiveState& eff, const Vector& x,
                        Tape& tape) {
    check_fresh(net, eff.revision, "effective state");
    if (x.size() != net.spec().input_dim) {
        throw std::invalid_argument("input length does not match input_dim");
    }
    tape.revision = net.revision();
    tape.input = x;
    tape.rescaled = net.rescaled_input(x);
    tape.base_output = forward_base_impl(net, eff, tape.rescaled, &tape);
    tape.output = tape.base_output + net.residual_term(x);
    tape.recorded = true;
    return tape.output;
}

namespace {

/// Accumulated gradients with respect to *effective* weights; the chain back
/// to raw weights happens once per batch in finalize_gradients.
struct EffectiveGradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    explicit EffectiveGradients(const MonotonicNetwork& net) {
        weights.reserve(net.layers().size());
        biases.reserve(net.layers().size());
        for (const auto& layer : net.layers()) {
            weights.emplace_back(layer.weights.rows(), layer.weights.cols(), 0.0);
            biases.emplace_back(layer.bias.size(), 0.0);
        }
    }
};

/// Backpropagates one recorded sample, accumulating d(effective W) and
/// d(bias), and returns d f / d x scaled by upstream.
Vector backward_accumulate(const MonotonicNetwork& net, const EffectiveState& eff,
                           const Tape& tape, double upstream, EffectiveGradients& accum) {
    if (!tape.recorded) throw std::logic_error("tape has not recorded a forward pass");
    check_fresh(net, tape.revision, "tape");
    check_fresh(net, eff.revision, "effective state");

    const auto& spec = net.spec();
    const std::size_t num_layers = net.layers().size();
    Vector dz(1, upstream);
    for (std::size_t ri = num_layers; ri-- > 0;) {
        // through the activation (none after the last layer)
        Vector da;
        if (ri + 1 == num_layers) {
            da = std::move(dz);
        } else if (spec.activation == Activation::group_sort) {
            const auto& perm = tape.sort_perms[ri];
            da.assign(dz.size(), 0.0);
            for (std::size_t p = 0; p < perm.size(); ++p) da[perm[p]] += dz[p];
        } else {
            const Vector& preact = tape.preactivations[ri];
            da = dz;
            for (std::size_t j = 0; j < da.size(); ++j) {
                if (preact[j] <= 0.0) da[j] = 0.0;
            }
        }
        // through the affine map
        const Vector& z_in = tape.layer_inputs[ri];
        Matrix& dw = accum.weights[ri];
        Vector& db = accum.biases[ri];
        for (std::size_t j = 0; j < da.size(); ++j) {
            const double g = da[j];
            if (g == 0.0) continue;
            db[j] += g;
            for (std::size_t k = 0; k < z_in.size(); ++k) dw(j, k) += g * z_in[k];
        }
        dz = matvec_transposed(eff.weights[ri], da);
    }

    // dz now holds d f / d rescaled input; undo the rescale and add the
    // residual contribution.
    Vector input_grad(spec.input_dim, 0.0);
    for (std::size_t i = 0; i < spec.input_dim; ++i) {
        const double li = spec.lambda_for_input(i);
        double g = dz[i];
        if (spec.lambda_per_input) g *= li / spec.lambda;
        if (spec.is_monotone_index(i)) g += li * upstream;
        input_grad[i] = g;
    }
    return input_grad;
}

Gradients finalize_gradients(const MonotonicNetwork& net, const EffectiveState& eff,
                             EffectiveGradients&& accum, Vector input_grad) {
    Gradients out;
    out.input = std::move(input_grad);
    out.biases = std::move(accum.biases);
    out.weights.reserve(net.layers().size());
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        out.weights.push_back(
            normalization_backward(net, i, eff.branches[i], accum.weights[i]));
    }
    return out;
}

}  // namespace

Gradients backward(const MonotonicNetwork& net, const EffectiveState& eff, const Tape& tape,
                   double upstream) {
    EffectiveGradients accum(net);
    Vector input_grad = backward_accumulate(net, eff, tape, upstream, accum);
    return finalize_gradients(net, eff, std::move(accum), std::move(input_grad));
}

Gradients backward(const MonotonicNetwork& net, const Vector& x, double upstream) {
    const EffectiveState eff = compute_effective(net);
    Tape tape;
    forward_recorded(net, eff, x, tape);
    return backward(net, eff, tape, upstream);
}

namespace {

struct OptimizerState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    std::size_t step_count = 0;

    explicit OptimizerState(const MonotonicNetwork& net) {
        for (const auto& layer : net.layers()) {
            m_w.emplace_back(layer.weights.rows(), layer.weights.cols(), 0.0);
            v_w.emplace_back(layer.weights.rows(), layer.weights.cols(), 0.0);
            m_b.emplace_back(layer.bias.size(), 0.0);
            v_b.emplace_back(layer.bias.size(), 0.0);
        }
    }
};

void adam_update(std::vector<double>& params, const std::vector<double>& grads,
                 std::vector<double>& m, std::vector<double>& v, const TrainConfig& cfg,
                 double bias1, double bias2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

void sgd_update(std::vector<double>& params, const std::vector<double>& grads,
                const TrainConfig& cfg) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= cfg.learning_rate * grads[i];
    }
}

void apply_step(MonotonicNetwork& net, const Gradients& grads, const TrainConfig& cfg,
                OptimizerState& opt) {
    ++opt.step_count;
    auto& layers = net.mutable_layers();
    if (cfg.optimizer == OptimizerKind::adam) {
        const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step_count));
        const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step_count));
        for (std::size_t i = 0; i < layers.size(); ++i) {
            adam_update(layers[i].weights.data(), grads.weights[i].data(), opt.m_w[i].data(),
                        opt.v_w[i].data(), cfg, bias1, bias2);
            adam_update(layers[i].bias, grads.biases[i], opt.m_b[i], opt.v_b[i], cfg, bias1,
                        bias2);
        }
    } else {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            sgd_update(layers[i].weights.data(), grads.weights[i].data(), cfg);
            sgd_update(layers[i].bias, grads.biases[i], cfg);
        }
    }
}

double evaluate_loss(const MonotonicNetwork& net, const TrainingSet& data, LossKind loss) {
    const EffectiveState eff = compute_effective(net);
    double total = 0.0;
    for (std::size_t i = 0; i < data.inputs.size(); ++i) {
        total += loss_value(loss, forward_value(net, eff, data.inputs[i]), data.targets[i]);
    }
    return total / static_cast<double>(data.inputs.size());
}

}  // namespace

TrainHistory train(MonotonicNetwork& net, const TrainingSet& data, const TrainConfig& cfg,
                   const TrainingSet* validation, const StepObserver& on_step) {
    cfg.validate();
    if (data.inputs.empty()) throw std::invalid_argument("training set is empty");
    if (data.inputs.size() != data.targets.size()) {
        throw std::invalid_argument("training inputs and targets differ in length");
    }
    if (cfg.loss == LossKind::bce_with_logit) {
        for (double t : data.targets) {
            if (t != 0.0 && t != 1.0) {
                throw std::invalid_argument("binary cross entropy expects labels in {0, 1}");
            }
        }
    }

    Rng shuffle_rng(mix_seed(cfg.seed, 0x5u));
    OptimizerState opt(net);
    std::vector<std::size_t> order(data.inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainHistory history;
    history.reserve(cfg.epochs);
    std::size_t global_step = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t num_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            const std::size_t batch = end - start;
            const EffectiveState eff = compute_effective(net);
            EffectiveGradients accum(net);
            double batch_loss = 0.0;
            Tape tape;
            for (std::size_t p = start; p < end; ++p) {
                const std::size_t idx = order[p];
                const double out = forward_recorded(net, eff, data.inputs[idx], tape);
                batch_loss += loss_value(cfg.loss, out, data.targets[idx]);
                const double upstream =
                    loss_gradient(cfg.loss, out, data.targets[idx]) / static_cast<double>(batch);
                backward_accumulate(net, eff, tape, upstream, accum);
            }
            batch_loss /= static_cast<double>(batch);
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "non-finite loss " << batch_loss << " at epoch " << epoch << ", batch "
                    << num_batches;
                throw std::runtime_error(msg.str());
            }
            Gradients grads = finalize_gradients(net, eff, std::move(accum),
                                                 Vector(net.spec().input_dim, 0.0));
            apply_step(net, grads, cfg, opt);
            if (net.spec().norm_mode == NormMode::project) project_in_place(net);
            ++global_step;
            if (on_step) on_step(net, global_step);
            epoch_loss += batch_loss;
            ++num_batches;
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss / static_cast<double>(num_batches);
        if (validation && !validation->inputs.empty()) {
            stats.val_loss = evaluate_loss(net, *validation, cfg.loss);
        }
        stats.lipschitz_product = lipschitz_product(net);
        history.push_back(stats);
    }
    return history;
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss,lipschitz_product\n";
    for (const auto& row : history) {
        out << row.epoch << ',' << format_double(row.train_loss) << ',';
        if (row.val_loss) out << format_double(*row.val_loss);
        out << ',' << format_double(row.lipschitz_product) << '\n';
    }
    atomic_write_file(path, out.str());
}

}  // namespace monolip
