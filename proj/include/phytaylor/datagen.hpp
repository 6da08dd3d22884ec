#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "phytaylor/knowledge.hpp"
#include "phytaylor/linalg.hpp"
#include "phytaylor/train.hpp"

namespace phytaylor {

// Three pendulums in a chain (1-2 and 2-3 coupled, 1-3 not), linear spring
// coupling in the angles. State layout: [theta1..theta3, v1..v3] with
// v_i = d(theta_i)/dt.
struct PendulumParams {
    static constexpr int kCount = 3;
    // coupling[i][j] = 1 when i and j are connected.
    std::array<std::array<int, kCount>, kCount> coupling = {{{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}};
    double length = 1.0;
    double mass = 1.0;
    double gravity = 9.81;
    double spring = 1.0;
    double dt = 1e-3;         // integrator step
    double sample_period = 0.05;  // spacing of recorded pairs
    int steps_per_trajectory = 50;
    int trajectories = 20;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PendulumDataset {
    Dataset data;                      // (state(k), state(k+1)) pairs
    std::vector<std::vector<Vec>> trajectories;  // sampled states per run
};

// d(state)/dt of the coupled system.
Vec pendulum_derivative(const PendulumParams& params, const Vec& state);

// Total mechanical energy (conserved by the continuous dynamics).
double pendulum_energy(const PendulumParams& params, const Vec& state);

// One RK4 step of an arbitrary autonomous derivative.
template <typename Deriv>
Vec rk4_step(const Deriv& f, const Vec& state, double dt) {
    const Vec k1 = f(state);
    auto shifted = [&](const Vec& k, double h) {
        Vec out(state.size());
        for (std::size_t i = 0; i < state.size(); ++i) out[i] = state[i] + h * k[i];
        return out;
    };
    const Vec k2 = f(shifted(k1, dt / 2.0));
    const Vec k3 = f(shifted(k2, dt / 2.0));
    const Vec k4 = f(shifted(k3, dt));
    Vec out(state.size());
    for (std::size_t i = 0; i < state.size(); ++i)
        out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Integrates `trajectories` runs with initial angles drawn from
// [angle_lo, angle_hi) and zero initial velocity; throws BlowUp when a state
// magnitude exceeds 1e6.
PendulumDataset simulate_pendulums(const PendulumParams& params, double angle_lo,
                                   double angle_hi);

// Nested degrees of embedded knowledge for the pendulum one-step predictor.
enum class PendulumKnowledge {
    none,          // everything unknown (plain dense network)
    law,           // angle rows depend on own angle and velocity only
    law_topology,  // adds: velocity rows cannot touch non-neighbour pendulums
    full,          // adds: known sampling period and force dependencies
};

// Knowledge matrix over m(state, order) for the chosen level.
KnowledgeSpec pendulum_knowledge(const PendulumParams& params, PendulumKnowledge level,
                                 int order);

// Six-state discrete vehicle model. Rows 1-3 are the exact sampling
// identities p_i(k+1) = p_i(k) + T * v_i(k); the remaining rows hold scalars
// unknown to the learner but concrete for the generator.
struct VehicleParams {
    double sampling_period = 0.1;
    // Row 4 depends on state 1 and state 4 only.
    double throttle_position = -0.05;
    double throttle_velocity = 0.92;
    // Free rows 5-6, entries over all six states.
    std::array<double, 6> row5 = {0.01, -0.02, 0.03, -0.01, 0.90, 0.05};
    std::array<double, 6> row6 = {0.0, 0.01, -0.03, 0.02, -0.05, 0.88};
    double noise_std = 0.005;
    int steps = 400;
    std::uint64_t seed = 0;

    void validate() const;
    Mat system_matrix() const;     // the full 6x6 ground-truth matrix
    double spectral_radius() const;
};

struct VehicleDataset {
    Dataset data;                 // noisy (x(k), x(k+1)) pairs
    std::vector<Vec> trajectory;  // noise-free ground truth for rollout scoring
};

VehicleDataset simulate_vehicle(const VehicleParams& params, const Vec& initial_state);

// Knowledge matrix over m(state, order) encoding exactly the known pattern:
// rows 1-3 fully known, row 4 restricted to states 1 and 4, rows 5-6 free.
KnowledgeSpec vehicle_knowledge(const VehicleParams& params, int order);

}  // namespace phytaylor
