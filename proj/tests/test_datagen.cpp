#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "phytaylor/datagen.hpp"
#include "phytaylor/errors.hpp"

using namespace phytaylor;

TEST_CASE("zero state is an equilibrium of the coupled pendulums") {
    PendulumParams params;
    Vec state(6, 0.0);
    auto deriv = [&](const Vec& s) { return pendulum_derivative(params, s); };
    for (int step = 0; step < 200; ++step) state = rk4_step(deriv, state, params.dt);
    for (double v : state) CHECK(v == 0.0);
}

TEST_CASE("energy drift stays below 0.1 percent over ten seconds") {
    PendulumParams params;
    params.dt = 1e-3;
    Vec state = {0.5, -0.3, 0.8, 0.0, 0.0, 0.0};
    const double initial = pendulum_energy(params, state);
    auto deriv = [&](const Vec& s) { return pendulum_derivative(params, s); };
    for (int step = 0; step < 10000; ++step) state = rk4_step(deriv, state, params.dt);
    const double final_energy = pendulum_energy(params, state);
    CHECK(std::abs(final_energy - initial) / initial < 1e-3);
}

TEST_CASE("uncoupled pendulums match the single-pendulum integrator") {
    PendulumParams params;
    params.spring = 0.0;
    params.dt = 1e-3;
    Vec state = {0.4, -0.9, 1.1, 0.0, 0.0, 0.0};

    // Independent scalar oracle.
    struct Single {
        double theta;
        double v;
    };
    auto single_step = [&](Single s) {
        const double grav = params.gravity / params.length;
        auto f = [&](Single in) { return Single{in.v, -grav * std::sin(in.theta)}; };
        const Single k1 = f(s);
        const Single k2 = f({s.theta + 0.5 * params.dt * k1.theta, s.v + 0.5 * params.dt * k1.v});
        const Single k3 = f({s.theta + 0.5 * params.dt * k2.theta, s.v + 0.5 * params.dt * k2.v});
        const Single k4 = f({s.theta + params.dt * k3.theta, s.v + params.dt * k3.v});
        return Single{s.theta + params.dt / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta),
                      s.v + params.dt / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
    };

    Single singles[3] = {{0.4, 0.0}, {-0.9, 0.0}, {1.1, 0.0}};
    auto deriv = [&](const Vec& s) { return pendulum_derivative(params, s); };
    for (int step = 0; step < 2000; ++step) {
        state = rk4_step(deriv, state, params.dt);
        for (auto& s : singles) s = single_step(s);
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(state[static_cast<std::size_t>(i)] - singles[i].theta) <= 1e-9);
        CHECK(std::abs(state[static_cast<std::size_t>(3 + i)] - singles[i].v) <= 1e-9);
    }
}

TEST_CASE("pendulum generation is deterministic under a seed") {
    PendulumParams params;
    params.trajectories = 3;
    params.steps_per_trajectory = 10;
    params.seed = 42;
    PendulumDataset a = simulate_pendulums(params, -1.0, 1.0);
    PendulumDataset b = simulate_pendulums(params, -1.0, 1.0);
    REQUIRE(a.data.size() == b.data.size());
    CHECK(a.data.size() == 30);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        CHECK(a.data.inputs[i] == b.data.inputs[i]);
        CHECK(a.data.targets[i] == b.data.targets[i]);
    }
}

TEST_CASE("pendulum knowledge levels nest") {
    PendulumParams params;
    params.sample_period = 0.02;
    const PendulumKnowledge levels[] = {PendulumKnowledge::none, PendulumKnowledge::law,
                                        PendulumKnowledge::law_topology, PendulumKnowledge::full};
    for (int step = 0; step < 3; ++step) {
        KnowledgeSpec weaker = pendulum_knowledge(params, levels[step], 2);
        KnowledgeSpec stronger = pendulum_knowledge(params, levels[step + 1], 2);
        int extra = 0;
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < weaker.basis().size(); ++j) {
                const auto& weak_entry = weaker.entry(i, j);
                const auto& strong_entry = stronger.entry(i, j);
                if (weak_entry.has_value()) {
                    REQUIRE(strong_entry.has_value());
                    CHECK(*strong_entry == *weak_entry);
                } else if (strong_entry.has_value()) {
                    ++extra;
                }
            }
        }
        CHECK(extra > 0);
    }
}

TEST_CASE("full pendulum knowledge pins the sampling identities") {
    PendulumParams params;
    params.sample_period = 0.02;
    KnowledgeSpec spec = pendulum_knowledge(params, PendulumKnowledge::full, 2);
    const MonomialBasis& basis = spec.basis();
    // Angle row 0: coefficient 1 on theta1, T on v1, zero elsewhere.
    for (int j = 0; j < basis.size(); ++j) {
        const auto& term = basis.term(j).exponents;
        REQUIRE(spec.entry(0, j).has_value());
        if (term == std::vector<int>{1, 0, 0, 0, 0, 0})
            CHECK(*spec.entry(0, j) == 1.0);
        else if (term == std::vector<int>{0, 0, 0, 1, 0, 0})
            CHECK(*spec.entry(0, j) == 0.02);
        else
            CHECK(*spec.entry(0, j) == 0.0);
    }
    // Velocity row of the middle pendulum may touch both neighbours' angles.
    int unknown_count = 0;
    for (int j = 0; j < basis.size(); ++j)
        if (!spec.entry(4, j).has_value()) ++unknown_count;
    // order 2 over angles {0,1,2}: 3 linear + 6 quadratic terms
    CHECK(unknown_count == 9);
    // The outer pendulum cannot touch the far angle.
    for (int j = 0; j < basis.size(); ++j) {
        const auto& term = basis.term(j).exponents;
        if (term[2] > 0) {
            REQUIRE(spec.entry(3, j).has_value());
            CHECK(*spec.entry(3, j) == 0.0);
        }
    }
}

TEST_CASE("vehicle recursion honours the known sampling rows") {
    VehicleParams params;
    params.noise_std = 0.0;
    params.steps = 5;
    VehicleDataset generated = simulate_vehicle(params, {1.0, -2.0, 0.5, 0.3, 0.1, -0.4});
    const Vec& x0 = generated.trajectory[0];
    const Vec& x1 = generated.trajectory[1];
    CHECK(x1[0] == x0[0] + 0.1 * x0[3]);
    CHECK(x1[1] == x0[1] + 0.1 * x0[4]);
    CHECK(x1[2] == x0[2] + 0.1 * x0[5]);

    VehicleDataset again = simulate_vehicle(params, {1.0, -2.0, 0.5, 0.3, 0.1, -0.4});
    for (std::size_t k = 0; k < generated.trajectory.size(); ++k)
        CHECK(generated.trajectory[k] == again.trajectory[k]);
}

TEST_CASE("vehicle knowledge pattern") {
    KnowledgeSpec spec = testfix::vehicle_spec();
    const MonomialBasis& basis = spec.basis();
    // Rows 1-3 fully known.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < basis.size(); ++j) CHECK(spec.entry(i, j).has_value());
    // Row 4 unknown exactly on the monomials over states 1 and 4.
    int unknown = 0;
    for (int j = 0; j < basis.size(); ++j) {
        const auto& term = basis.term(j).exponents;
        bool only_14 = true;
        for (int v = 0; v < 6; ++v)
            if (term[static_cast<std::size_t>(v)] > 0 && v != 0 && v != 3) only_14 = false;
        if (only_14) {
            CHECK_FALSE(spec.entry(3, j).has_value());
            ++unknown;
        } else {
            REQUIRE(spec.entry(3, j).has_value());
            CHECK(*spec.entry(3, j) == 0.0);
        }
    }
    CHECK(unknown == 6);  // 1, x1, x4, x1^2, x1*x4, x4^2
    // Rows 5-6 free.
    for (int i = 4; i < 6; ++i)
        for (int j = 0; j < basis.size(); ++j) CHECK_FALSE(spec.entry(i, j).has_value());
}

TEST_CASE("spectral radius guard") {
    VehicleParams params;
    CHECK(params.spectral_radius() <= 1.05);
    params.throttle_velocity = 1.5;
    CHECK_THROWS_AS(params.validate(), InvalidArgument);
}

TEST_CASE("slow geometric growth trips the blow-up guard") {
    VehicleParams params;
    params.noise_std = 0.0;
    params.steps = 500;
    params.throttle_position = 0.0;
    params.throttle_velocity = 1.04;
    params.row5 = {0, 0, 0, 0, 0.5, 0};
    params.row6 = {0, 0, 0, 0, 0, 0.5};
    CHECK(params.spectral_radius() <= 1.05);
    CHECK_THROWS_AS(simulate_vehicle(params, {0, 0, 0, 1.0, 0, 0}), BlowUp);
}
