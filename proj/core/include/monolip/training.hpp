#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "monolip/constraints.hpp"
#include "monolip/linalg.hpp"
#include "monolip/network.hpp"

namespace monolip {

enum class LossKind { bce_with_logit, mse };
enum class OptimizerKind { sgd, adam };

struct TrainConfig {
    LossKind loss = LossKind::bce_with_logit;
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainingSet {
    std::vector<Vector> inputs;
    std::vector<double> targets;
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
    double lipschitz_product = 0.0;
};

using TrainHistory = std::vector<EpochStats>;

/// Numerically stable binary cross entropy on a logit, label in {0, 1}.
double loss_bce_with_logit(double logit, double label);
double loss_mse(double prediction, double target);
double loss_value(LossKind kind, double output, double target);
/// d loss / d output.
double loss_gradient(LossKind kind, double output, double target);

/// Effective weights plus normalization branch state for a fixed parameter
/// snapshot; reused across a batch.
struct EffectiveState {
    std::uint64_t revision = 0;
    std::vector<Matrix> weights;
    std::vector<NormBranch> branches;
};

EffectiveState compute_effective(const MonotonicNetwork& net);

/// Forward intermediates sufficient to replay the pass backwards: layer
/// inputs, pre-activations and the realized sort permutations.
struct Tape {
    std::uint64_t revision = 0;
    bool recorded = false;
    Vector input;
    Vector rescaled;
    std::vector<Vector> layer_inputs;
    std::vector<Vector> preactivations;
    std::vector<std::vector<std::uint32_t>> sort_perms;
    double base_output = 0.0;
    double output = 0.0;
};

/// f(x) without recording.
double forward_value(const MonotonicNetwork& net, const EffectiveState& eff, const Vector& x);
/// g(z) on an input already in g's coordinates, without recording.
double forward_base_value(const MonotonicNetwork& net, const EffectiveState& eff,
                          const Vector& z);
/// f(x), recording intermediates onto the tape.
double forward_recorded(const MonotonicNetwork& net, const EffectiveState& eff, const Vector& x,
                        Tape& tape);

struct Gradients {
    std::vector<Matrix> weights;  // with respect to raw weights
    std::vector<Vector> biases;
    Vector input;  // d f / d x, raw input coordinates
};

/// Reverse pass over a recorded tape. upstream scales every returned
/// gradient (pass d loss / d f to differentiate a loss). Throws
/// std::logic_error when the tape or effective state is stale, i.e. recorded
/// against a different parameter revision.
Gradients backward(const MonotonicNetwork& net, const EffectiveState& eff, const Tape& tape,
                   double upstream);

/// Convenience single-call form: forward + backward at x.
Gradients backward(const MonotonicNetwork& net, const Vector& x, double upstream);

/// Called after each optimizer step (and projection, in project mode).
using StepObserver = std::function<void(const MonotonicNetwork&, std::size_t step)>;

/// Mini-batch training. Batch gradients are means over the batch; the batch
/// order is reshuffled every epoch from cfg.seed. In project mode the
/// network is projected back into the feasible set after every step. Throws
/// std::runtime_error with the epoch/batch index if the loss goes
/// non-finite.
TrainHistory train(MonotonicNetwork& net, const TrainingSet& data, const TrainConfig& cfg,
                   const TrainingSet* validation = nullptr, const StepObserver& on_step = {});

/// Columns: epoch,train_loss,val_loss,lipschitz_product.
void write_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace monolip
