#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "monolip/training.hpp"
#include "test_support.hpp"

using namespace monolip;
using testsupport::random_input;
using testsupport::random_net;
using testsupport::random_spec;

TEST_CASE("loss values") {
    CHECK(loss_bce_with_logit(0.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(loss_bce_with_logit(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(loss_bce_with_logit(30.0, 1.0) < 1e-12);
    CHECK(loss_bce_with_logit(-30.0, 0.0) < 1e-12);
    CHECK(loss_mse(3.5, 3.5) == 0.0);
    CHECK(loss_mse(2.0, -1.0) == 9.0);

    // gradients against central differences
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double z = rng.uniform(-5.0, 5.0);
        const double y = trial % 2 == 0 ? 1.0 : 0.0;
        const double eps = 1e-6;
        const double fd_bce =
            (loss_bce_with_logit(z + eps, y) - loss_bce_with_logit(z - eps, y)) / (2.0 * eps);
        CHECK(testsupport::rel_err(loss_gradient(LossKind::bce_with_logit, z, y), fd_bce) <
              1e-8);
        const double t = rng.uniform(-2.0, 2.0);
        const double fd_mse = (loss_mse(z + eps, t) - loss_mse(z - eps, t)) / (2.0 * eps);
        CHECK(testsupport::rel_err(loss_gradient(LossKind::mse, z, t), fd_mse) < 1e-8);
    }
}

TEST_CASE("backward: residual-only network") {
    NetworkSpec spec;
    spec.input_dim = 3;
    spec.lambda = 2.0;
    spec.monotone_indices = {0};
    std::vector<DenseLayer> layers;
    layers.push_back(DenseLayer{Matrix(1, 3, 0.0), Vector{0.0}});
    MonotonicNetwork net(spec, std::move(layers));
    const Gradients grads = backward(net, Vector{0.3, -0.7, 1.1}, 1.0);
    CHECK(grads.input == Vector{2.0, 0.0, 0.0});

    // upstream scales linearly
    const Gradients scaled = backward(net, Vector{0.3, -0.7, 1.1}, -0.5);
    CHECK(scaled.input == Vector{-1.0, 0.0, 0.0});
}

TEST_CASE("backward matches finite differences across schemes, modes, activations") {
    Rng rng(907);
    int done = 0;
    int attempts = 0;
    while (done < 25 && attempts < 500) {
        ++attempts;
        testsupport::SpecOptions opt;
        opt.max_depth = 3;
        opt.max_width = 8;
        const NetworkSpec spec = random_spec(rng, opt);
        MonotonicNetwork net = random_net(rng, spec, 1.2);
        const Vector x = random_input(rng, spec.input_dim);
        if (testsupport::kink_margin(net, x) < 1e-4) continue;  // resample near kinks
        const auto check = testsupport::check_gradients(net, x);
        CHECK(check.max_rel_err < 1e-5);
        ++done;
    }
    CHECK(done == 25);
}

TEST_CASE("backward input gradient is budget-bounded in direct mode") {
    Rng rng(919);
    for (int trial = 0; trial < 10; ++trial) {
        NetworkSpec spec = random_spec(rng);
        spec.norm_mode = NormMode::direct;
        spec.monotone_indices.clear();
        spec.lambda_per_input.reset();
        MonotonicNetwork net = random_net(rng, spec, 1.5);
        for (int point = 0; point < 50; ++point) {
            const Gradients grads = backward(net, random_input(rng, spec.input_dim), 1.0);
            for (double g : grads.input) CHECK(std::abs(g) <= spec.lambda + 1e-9);
        }
    }
}

TEST_CASE("stale tape and stale effective state are rejected") {
    Rng rng(23);
    const NetworkSpec spec = random_spec(rng);
    MonotonicNetwork net = MonotonicNetwork::initialize(spec);
    const EffectiveState eff = compute_effective(net);
    Tape tape;
    forward_recorded(net, eff, random_input(rng, spec.input_dim), tape);

    net.mutable_layers();  // bump the revision
    CHECK_THROWS_AS(backward(net, eff, tape, 1.0), std::logic_error);
    CHECK_THROWS_AS(forward_value(net, eff, random_input(rng, spec.input_dim)),
                    std::logic_error);

    Tape blank;
    const EffectiveState fresh = compute_effective(net);
    CHECK_THROWS_AS(backward(net, fresh, blank, 1.0), std::logic_error);
}

namespace {

TrainingSet two_point_set() {
    TrainingSet set;
    set.inputs = {Vector{1.0, 0.2}, Vector{-1.0, -0.4}};
    set.targets = {1.0, 0.0};
    return set;
}

NetworkSpec small_spec(std::uint64_t seed) {
    NetworkSpec spec;
    spec.input_dim = 2;
    spec.hidden_widths = {4};
    spec.group_size = 2;
    spec.lambda = 2.0;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters untouched") {
    MonotonicNetwork net = MonotonicNetwork::initialize(small_spec(3));
    const auto before = net.layers();
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    train(net, two_point_set(), cfg);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(net.layers()[i].weights == before[i].weights);
        CHECK(net.layers()[i].bias == before[i].bias);
    }
}

TEST_CASE("loss decreases on a separable problem") {
    MonotonicNetwork net = MonotonicNetwork::initialize(small_spec(4));
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 10;
    cfg.batch_size = 2;
    const TrainHistory history = train(net, two_point_set(), cfg);
    REQUIRE(history.size() == 10);
    for (std::size_t e = 1; e < history.size(); ++e) {
        CHECK(history[e].train_loss < history[e - 1].train_loss);
    }
}

TEST_CASE("training is deterministic given the seed") {
    Rng rng(31);
    TrainingSet data;
    for (int i = 0; i < 64; ++i) {
        data.inputs.push_back(random_input(rng, 2));
        data.targets.push_back(i % 2 == 0 ? 1.0 : 0.0);
    }
    const auto run = [&data] {
        MonotonicNetwork net = MonotonicNetwork::initialize(small_spec(9));
        TrainConfig cfg;
        cfg.epochs = 4;
        cfg.batch_size = 8;
        cfg.seed = 77;
        train(net, data, cfg);
        return net;
    };
    const MonotonicNetwork a = run();
    const MonotonicNetwork b = run();
    for (std::size_t i = 0; i < a.layers().size(); ++i) {
        CHECK(a.layers()[i].weights == b.layers()[i].weights);
        CHECK(a.layers()[i].bias == b.layers()[i].bias);
    }
}

TEST_CASE("project mode keeps every step feasible") {
    Rng rng(37);
    TrainingSet data;
    for (int i = 0; i < 48; ++i) {
        data.inputs.push_back(random_input(rng, 2));
        data.targets.push_back(rng.uniform01() < 0.5 ? 1.0 : 0.0);
    }
    for (const NormScheme scheme :
         {NormScheme::variant_a, NormScheme::variant_b, NormScheme::column_wise}) {
        NetworkSpec spec = small_spec(11);
        spec.norm_mode = NormMode::project;
        spec.norm_scheme = scheme;
        MonotonicNetwork net = MonotonicNetwork::initialize(spec);
        TrainConfig cfg;
        cfg.learning_rate = 0.05;  // big steps so projection actually works
        cfg.epochs = 3;
        cfg.batch_size = 8;
        std::size_t observed = 0;
        train(net, data, cfg, nullptr,
              [&](const MonotonicNetwork& snapshot, std::size_t) {
                  ++observed;
                  for (const auto& layer : snapshot.layers()) {
                      CHECK(one_norm(layer.weights) <=
                            snapshot.spec().layer_budget() + 1e-12);
                  }
              });
        CHECK(observed == 3 * 6);  // 48 samples / batch 8 = 6 steps per epoch
    }
}

TEST_CASE("a batch step equals the mean of per-sample gradients") {
    const NetworkSpec spec = small_spec(23);
    const TrainingSet data = two_point_set();

    MonotonicNetwork stepped = MonotonicNetwork::initialize(spec);
    TrainConfig cfg;
    cfg.optimizer = OptimizerKind::sgd;
    cfg.learning_rate = 0.25;
    cfg.epochs = 1;
    cfg.batch_size = 2;
    train(stepped, data, cfg);

    MonotonicNetwork manual = MonotonicNetwork::initialize(spec);
    std::vector<Matrix> weight_grads;
    std::vector<Vector> bias_grads;
    for (const auto& layer : manual.layers()) {
        weight_grads.emplace_back(layer.weights.rows(), layer.weights.cols(), 0.0);
        bias_grads.emplace_back(layer.bias.size(), 0.0);
    }
    for (std::size_t s = 0; s < data.inputs.size(); ++s) {
        const double out = manual.value(data.inputs[s]);
        const double upstream = loss_gradient(cfg.loss, out, data.targets[s]) / 2.0;
        const Gradients g = backward(manual, data.inputs[s], upstream);
        for (std::size_t l = 0; l < weight_grads.size(); ++l) {
            for (std::size_t k = 0; k < weight_grads[l].data().size(); ++k) {
                weight_grads[l].data()[k] += g.weights[l].data()[k];
            }
            for (std::size_t k = 0; k < bias_grads[l].size(); ++k) {
                bias_grads[l][k] += g.biases[l][k];
            }
        }
    }
    auto& layers = manual.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t k = 0; k < layers[l].weights.data().size(); ++k) {
            layers[l].weights.data()[k] -= cfg.learning_rate * weight_grads[l].data()[k];
        }
        for (std::size_t k = 0; k < layers[l].bias.size(); ++k) {
            layers[l].bias[k] -= cfg.learning_rate * bias_grads[l][k];
        }
    }

    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& a = stepped.layers()[l];
        const auto& b = manual.layers()[l];
        for (std::size_t k = 0; k < a.weights.data().size(); ++k) {
            CHECK(a.weights.data()[k] ==
                  doctest::Approx(b.weights.data()[k]).epsilon(1e-13));
        }
        for (std::size_t k = 0; k < a.bias.size(); ++k) {
            CHECK(a.bias[k] == doctest::Approx(b.bias[k]).epsilon(1e-13));
        }
    }
}

TEST_CASE("training rejects bad input and non-finite losses") {
    MonotonicNetwork net = MonotonicNetwork::initialize(small_spec(13));
    TrainConfig cfg;
    CHECK_THROWS_AS(train(net, TrainingSet{}, cfg), std::invalid_argument);

    TrainingSet bad_labels;
    bad_labels.inputs = {Vector{0.0, 0.0}};
    bad_labels.targets = {0.5};
    CHECK_THROWS_AS(train(net, bad_labels, cfg), std::invalid_argument);

    // mse against an astronomically large target overflows within an epoch
    TrainingSet explode;
    explode.inputs = {Vector{1.0, 1.0}};
    explode.targets = {1e308};
    TrainConfig mse_cfg;
    mse_cfg.loss = LossKind::mse;
    mse_cfg.optimizer = OptimizerKind::sgd;
    mse_cfg.learning_rate = 1e300;
    mse_cfg.epochs = 10;
    MonotonicNetwork victim = MonotonicNetwork::initialize(small_spec(17));
    try {
        train(victim, explode, mse_cfg);
        FAIL("expected a non-finite loss error");
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        CHECK(what.find("epoch") != std::string::npos);
    }
}

TEST_CASE("history records validation loss and layer-norm product") {
    Rng rng(41);
    TrainingSet data;
    for (int i = 0; i < 32; ++i) {
        data.inputs.push_back(random_input(rng, 2));
        data.targets.push_back(rng.uniform01() < 0.5 ? 1.0 : 0.0);
    }
    TrainingSet val;
    for (int i = 0; i < 8; ++i) {
        val.inputs.push_back(random_input(rng, 2));
        val.targets.push_back(rng.uniform01() < 0.5 ? 1.0 : 0.0);
    }
    MonotonicNetwork net = MonotonicNetwork::initialize(small_spec(19));
    TrainConfig cfg;
    cfg.epochs = 3;
    const TrainHistory history = train(net, data, cfg, &val);
    REQUIRE(history.size() == 3);
    for (const auto& stats : history) {
        CHECK(stats.val_loss.has_value());
        CHECK(std::isfinite(stats.train_loss));
        CHECK(stats.lipschitz_product <= net.spec().lambda * (1.0 + 1e-9));
    }
}
