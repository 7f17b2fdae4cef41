#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "monolip/constraints.hpp"
#include "monolip/network.hpp"
#include "monolip/random.hpp"
#include "test_support.hpp"

using namespace monolip;
using testsupport::random_net;
using testsupport::random_spec;

TEST_CASE("variant_a scaling") {
    const Matrix id = Matrix::identity(2);
    CHECK(effective_weights_variant_a(id, 1.0, 1) == id);

    Matrix two_id(2, 2, {2.0, 0.0, 0.0, 2.0});
    CHECK(effective_weights_variant_a(two_id, 1.0, 1) == id);

    // |W|_1 = 0.5, budget 16^(1/4) = 2, max(1, 0.5) = 1: result is 2W
    Matrix half(2, 2, {0.25, 0.0, 0.25, 0.25});
    const Matrix scaled = effective_weights_variant_a(half, 16.0, 4);
    CHECK(scaled == Matrix(2, 2, {0.5, 0.0, 0.5, 0.5}));
}

TEST_CASE("variant_b scaling") {
    CHECK(effective_weights_variant_b(Matrix(1, 1, {4.0}), 2.0, 1) == Matrix(1, 1, {2.0}));

    // inactive constraint leaves W bitwise untouched
    Matrix w(2, 2, {0.3, -0.1, 0.2, 0.4});
    CHECK(effective_weights_variant_b(w, 1.0, 1) == w);
    CHECK(effective_weights_variant_b(Matrix::identity(2), 4.0, 2) == Matrix::identity(2));
}

TEST_CASE("column-wise scaling") {
    // column sums (0.5, 3.0) with budget 1: only the second column shrinks
    Matrix w(2, 2, {0.25, 1.0, 0.25, 2.0});
    const Matrix scaled = effective_weights_colwise(w, 1.0, 1);
    CHECK(scaled(0, 0) == 0.25);
    CHECK(scaled(1, 0) == 0.25);
    CHECK(scaled(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(scaled(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    // all columns inside the budget: bitwise untouched
    Matrix feasible(2, 2, {0.3, 0.2, 0.1, 0.4});
    CHECK(effective_weights_colwise(feasible, 1.0, 1) == feasible);

    Matrix four_id(2, 2, {4.0, 0.0, 0.0, 4.0});
    CHECK(effective_weights_colwise(four_id, 2.0, 1) == Matrix(2, 2, {2.0, 0.0, 0.0, 2.0}));
}

TEST_CASE("every scheme satisfies the per-layer budget") {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t rows = 1 + rng.uniform_below(6);
        const std::size_t cols = 1 + rng.uniform_below(6);
        Matrix w(rows, cols, 0.0);
        for (double& x : w.data()) x = rng.uniform(-4.0, 4.0);
        const double lambda = std::exp(rng.uniform(-1.0, 2.5));
        const std::size_t m = 1 + rng.uniform_below(5);
        const double budget = std::pow(lambda, 1.0 / static_cast<double>(m));
        CHECK(one_norm(effective_weights_variant_a(w, lambda, m)) <= budget * (1.0 + 1e-12));
        CHECK(one_norm(effective_weights_variant_b(w, lambda, m)) <= budget * (1.0 + 1e-12));
        const Matrix cw = effective_weights_colwise(w, lambda, m);
        CHECK(one_norm(cw) <= budget * (1.0 + 1e-12));
        for (double s : column_abs_sums(cw)) CHECK(s <= budget * (1.0 + 1e-12));
    }
}

TEST_CASE("projection: feasible nets are bitwise unchanged") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const NetworkSpec spec = random_spec(rng);
        MonotonicNetwork net = random_net(rng, spec, 0.05 * spec.layer_budget());
        // small weights: very likely already feasible; skip the rare miss
        bool feasible = true;
        for (const auto& layer : net.layers()) {
            if (one_norm(layer.weights) > spec.layer_budget()) feasible = false;
        }
        if (!feasible) continue;
        const auto before = net.layers();
        project_in_place(net);
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(net.layers()[i].weights == before[i].weights);
        }
    }
}

TEST_CASE("projection restores feasibility and is idempotent") {
    Rng rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        const NetworkSpec spec = random_spec(rng);
        MonotonicNetwork net = random_net(rng, spec, 2.0);
        project_in_place(net);
        const double budget = spec.layer_budget();
        for (const auto& layer : net.layers()) {
            CHECK(one_norm(layer.weights) <= budget + 1e-12);
        }
        const auto after_first = net.layers();
        project_in_place(net);
        for (std::size_t i = 0; i < after_first.size(); ++i) {
            const auto& first = after_first[i].weights.data();
            const auto& second = net.layers()[i].weights.data();
            for (std::size_t k = 0; k < first.size(); ++k) {
                CHECK(std::abs(second[k] - first[k]) <=
                      1e-15 * std::max(1.0, std::abs(first[k])));
            }
        }
    }
}

TEST_CASE("layer-norm product stays within lambda across schemes and modes") {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const NetworkSpec spec = random_spec(rng);
        MonotonicNetwork net = random_net(rng, spec, 1.5);
        if (spec.norm_mode == NormMode::project) project_in_place(net);
        CHECK(lipschitz_product(net) <= spec.lambda * (1.0 + 1e-9));
    }
}

TEST_CASE("feasible matrices are fixed points of the projection") {
    Rng rng(53);
    for (int trial = 0; trial < 30; ++trial) {
        NetworkSpec spec = random_spec(rng);
        spec.norm_mode = NormMode::project;
        MonotonicNetwork net = random_net(rng, spec, 2.0);
        project_in_place(net);  // now feasible
        // nudge strictly inside the budget so no boundary rounding is in play
        for (auto& layer : net.mutable_layers()) {
            for (double& x : layer.weights.data()) x *= 0.99;
        }
        const auto before = net.layers();
        project_in_place(net);
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(net.layers()[i].weights == before[i].weights);
        }
    }
}

TEST_CASE("effective_weights dispatches by mode") {
    Rng rng(67);
    NetworkSpec spec = random_spec(rng);
    spec.norm_mode = NormMode::project;
    MonotonicNetwork net = random_net(rng, spec, 2.0);
    // project mode: raw weights identically, even infeasible ones
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        CHECK(effective_weights(net, i) == net.layers()[i].weights);
    }

    spec.norm_mode = NormMode::direct;
    spec.norm_scheme = NormScheme::variant_b;
    MonotonicNetwork direct_net = random_net(rng, spec, 0.01);
    for (std::size_t i = 0; i < direct_net.layers().size(); ++i) {
        if (one_norm(direct_net.layers()[i].weights) <= spec.layer_budget()) {
            CHECK(effective_weights(direct_net, i) == direct_net.layers()[i].weights);
        }
    }
    CHECK_THROWS_AS(effective_weights(direct_net, direct_net.layers().size()),
                    std::out_of_range);
}

TEST_CASE("recorded branches reproduce the plain effective weights") {
    Rng rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        const NetworkSpec spec = random_spec(rng);
        MonotonicNetwork net = random_net(rng, spec, 1.5);
        for (std::size_t i = 0; i < net.layers().size(); ++i) {
            NormBranch branch;
            CHECK(effective_weights_recorded(net, i, branch) == effective_weights(net, i));
        }
    }
}
