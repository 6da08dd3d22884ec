#include "phytaylor/datagen.hpp"

#include <cmath>

#include "phytaylor/errors.hpp"
#include "phytaylor/rng.hpp"

namespace phytaylor {

void PendulumParams::validate() const {
    if (dt <= 0.0 || sample_period <= 0.0) throw InvalidArgument("pendulum: dt and sample period must be > 0");
    if (length <= 0.0 || mass <= 0.0 || gravity <= 0.0 || spring < 0.0)
        throw InvalidArgument("pendulum: physical constants must be positive");
    if (steps_per_trajectory < 1 || trajectories < 1)
        throw InvalidArgument("pendulum: need at least one step and one trajectory");
    if (coupling[0][2] != 0 || coupling[2][0] != 0)
        throw InvalidArgument("pendulum: outer pendulums must stay uncoupled");
}

Vec pendulum_derivative(const PendulumParams& params, const Vec& state) {
    constexpr int n = PendulumParams::kCount;
    Vec deriv(2 * n);
    for (int i = 0; i < n; ++i) deriv[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(n + i)];
    const double grav = params.gravity / params.length;
    const double stiff = params.spring / params.mass;
    for (int i = 0; i < n; ++i) {
        double acc = -grav * std::sin(state[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            if (!params.coupling[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
            acc += stiff * (state[static_cast<std::size_t>(j)] - state[static_cast<std::size_t>(i)]);
        }
        deriv[static_cast<std::size_t>(n + i)] = acc;
    }
    return deriv;
}

double pendulum_energy(const PendulumParams& params, const Vec& state) {
    constexpr int n = PendulumParams::kCount;
    const double grav = params.gravity / params.length;
    const double stiff = params.spring / params.mass;
    double energy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double theta = state[static_cast<std::size_t>(i)];
        const double v = state[static_cast<std::size_t>(n + i)];
        energy += 0.5 * v * v + grav * (1.0 - std::cos(theta));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (!params.coupling[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
            const double gap = state[static_cast<std::size_t>(i)] - state[static_cast<std::size_t>(j)];
            energy += 0.5 * stiff * gap * gap;
        }
    return energy;
}

namespace {

void check_sane(const Vec& state) {
    for (double v : state)
        if (!std::isfinite(v) || std::abs(v) > 1e6)
            throw BlowUp("simulation left the numerically sane range");
}

}  // namespace

PendulumDataset simulate_pendulums(const PendulumParams& params, double angle_lo,
                                   double angle_hi) {
    params.validate();
    if (!(angle_lo < angle_hi)) throw InvalidArgument("pendulum: empty initial angle range");

    Rng rng(params.seed);
    const int substeps = std::max(1, static_cast<int>(std::lround(params.sample_period / params.dt)));
    auto deriv = [&](const Vec& s) { return pendulum_derivative(params, s); };

    PendulumDataset out;
    for (int run = 0; run < params.trajectories; ++run) {
        Vec state(6, 0.0);
        for (int i = 0; i < PendulumParams::kCount; ++i)
            state[static_cast<std::size_t>(i)] = rng.uniform(angle_lo, angle_hi);

        std::vector<Vec> sampled;
        sampled.push_back(state);
        for (int step = 0; step < params.steps_per_trajectory; ++step) {
            for (int k = 0; k < substeps; ++k) state = rk4_step(deriv, state, params.dt);
            check_sane(state);
            sampled.push_back(state);
        }
        for (std::size_t k = 0; k + 1 < sampled.size(); ++k) {
            out.data.inputs.push_back(sampled[k]);
            out.data.targets.push_back(sampled[k + 1]);
        }
        out.trajectories.push_back(std::move(sampled));
    }
    out.data.assign_default_splits();
    return out;
}

namespace {

// True when the monomial touches only the listed variables.
bool uses_only(const ExponentVector& term, const std::vector<int>& allowed) {
    for (std::size_t v = 0; v < term.exponents.size(); ++v) {
        if (term.exponents[v] == 0) continue;
        bool ok = false;
        for (int a : allowed)
            if (a == static_cast<int>(v)) ok = true;
        if (!ok) return false;
    }
    return true;
}

bool touches_any(const ExponentVector& term, const std::vector<int>& banned) {
    for (int v : banned)
        if (term.exponents[static_cast<std::size_t>(v)] != 0) return true;
    return false;
}

bool is_linear_in(const ExponentVector& term, int var) {
    if (term.exponents[static_cast<std::size_t>(var)] != 1) return false;
    return term.degree() == 1;
}

}  // namespace

KnowledgeSpec pendulum_knowledge(const PendulumParams& params, PendulumKnowledge level,
                                 int order) {
    constexpr int n = PendulumParams::kCount;
    MonomialBasis basis = build_basis(2 * n, order);
    std::vector<std::vector<KnowledgeEntry>> entries(
        6, std::vector<KnowledgeEntry>(static_cast<std::size_t>(basis.size()), std::nullopt));
    if (level == PendulumKnowledge::none) return KnowledgeSpec(std::move(basis), std::move(entries));

    // Angle rows: the next angle is a function of the own angle and the own
    // velocity only.
    for (int i = 0; i < n; ++i) {
        auto& row = entries[static_cast<std::size_t>(i)];
        for (int j = 0; j < basis.size(); ++j) {
            const auto& term = basis.term(j);
            if (level == PendulumKnowledge::full) {
                if (is_linear_in(term, i))
                    row[static_cast<std::size_t>(j)] = 1.0;
                else if (is_linear_in(term, n + i))
                    row[static_cast<std::size_t>(j)] = params.sample_period;
                else
                    row[static_cast<std::size_t>(j)] = 0.0;
            } else {
                if (is_linear_in(term, i) || is_linear_in(term, n + i))
                    row[static_cast<std::size_t>(j)] = std::nullopt;
                else
                    row[static_cast<std::size_t>(j)] = 0.0;
            }
        }
    }
    if (level == PendulumKnowledge::law) return KnowledgeSpec(std::move(basis), std::move(entries));

    // Velocity rows: no influence from pendulums outside the coupling chain.
    for (int i = 0; i < n; ++i) {
        auto& row = entries[static_cast<std::size_t>(n + i)];
        std::vector<int> banned;
        for (int q = 0; q < n; ++q) {
            if (q == i || params.coupling[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)]) continue;
            banned.push_back(q);
            banned.push_back(n + q);
        }
        if (level == PendulumKnowledge::full) {
            // The force depends on own and neighbour angles only; velocity
            // enters through the known sampling identity alone.
            std::vector<int> allowed_angles;
            allowed_angles.push_back(i);
            for (int q = 0; q < n; ++q)
                if (params.coupling[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)])
                    allowed_angles.push_back(q);
            for (int j = 0; j < basis.size(); ++j) {
                const auto& term = basis.term(j);
                if (is_linear_in(term, n + i))
                    row[static_cast<std::size_t>(j)] = 1.0;
                else if (term.degree() >= 1 && uses_only(term, allowed_angles))
                    row[static_cast<std::size_t>(j)] = std::nullopt;
                else
                    row[static_cast<std::size_t>(j)] = 0.0;
            }
        } else {
            for (int j = 0; j < basis.size(); ++j)
                if (touches_any(basis.term(j), banned)) row[static_cast<std::size_t>(j)] = 0.0;
        }
    }
    return KnowledgeSpec(std::move(basis), std::move(entries));
}

void VehicleParams::validate() const {
    if (sampling_period <= 0.0) throw InvalidArgument("vehicle: sampling period must be > 0");
    if (noise_std < 0.0) throw InvalidArgument("vehicle: noise std must be >= 0");
    if (steps < 2) throw InvalidArgument("vehicle: need at least two steps");
    const double radius = spectral_radius();
    if (radius > 1.05)
        throw InvalidArgument("vehicle: spectral radius " + std::to_string(radius) +
                              " exceeds 1.05, trajectories would blow up");
}

Mat VehicleParams::system_matrix() const {
    Mat a(6, 6);
    for (int i = 0; i < 3; ++i) {
        a(i, i) = 1.0;
        a(i, i + 3) = sampling_period;
    }
    a(3, 0) = throttle_position;
    a(3, 3) = throttle_velocity;
    for (int j = 0; j < 6; ++j) {
        a(4, j) = row5[static_cast<std::size_t>(j)];
        a(5, j) = row6[static_cast<std::size_t>(j)];
    }
    return a;
}

double VehicleParams::spectral_radius() const {
    const Mat a = system_matrix();
    Vec v(6, 1.0);
    double log_growth = 0.0;
    constexpr int kIters = 400;
    constexpr int kBurnIn = 100;
    for (int k = 0; k < kIters; ++k) {
        v = a.apply(v);
        const double n = norm(v);
        if (n == 0.0) return 0.0;
        for (double& x : v) x /= n;
        if (k >= kBurnIn) log_growth += std::log(n);
    }
    return std::exp(log_growth / static_cast<double>(kIters - kBurnIn));
}

VehicleDataset simulate_vehicle(const VehicleParams& params, const Vec& initial_state) {
    params.validate();
    if (initial_state.size() != 6) throw DimensionMismatch("vehicle: state must have 6 entries");

    Rng rng(params.seed);
    const Mat a = params.system_matrix();

    VehicleDataset out;
    Vec state = initial_state;
    out.trajectory.push_back(state);
    std::vector<Vec> observed;
    auto observe = [&](const Vec& s) {
        Vec obs = s;
        if (params.noise_std > 0.0)
            for (double& x : obs) x += rng.normal(0.0, params.noise_std);
        return obs;
    };
    observed.push_back(observe(state));
    for (int k = 0; k < params.steps; ++k) {
        state = a.apply(state);
        check_sane(state);
        out.trajectory.push_back(state);
        observed.push_back(observe(state));
    }
    for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
        out.data.inputs.push_back(observed[k]);
        out.data.targets.push_back(observed[k + 1]);
    }
    out.data.assign_default_splits();
    return out;
}

KnowledgeSpec vehicle_knowledge(const VehicleParams& params, int order) {
    MonomialBasis basis = build_basis(6, order);
    std::vector<std::vector<KnowledgeEntry>> entries(
        6, std::vector<KnowledgeEntry>(static_cast<std::size_t>(basis.size()), std::nullopt));

    for (int i = 0; i < 3; ++i) {
        auto& row = entries[static_cast<std::size_t>(i)];
        for (int j = 0; j < basis.size(); ++j) {
            const auto& term = basis.term(j);
            if (is_linear_in(term, i))
                row[static_cast<std::size_t>(j)] = 1.0;
            else if (is_linear_in(term, i + 3))
                row[static_cast<std::size_t>(j)] = params.sampling_period;
            else
                row[static_cast<std::size_t>(j)] = 0.0;
        }
    }
    // Row 4: next longitudinal velocity is driven by position and velocity
    // along the same axis only.
    for (int j = 0; j < basis.size(); ++j)
        if (!uses_only(basis.term(j), {0, 3})) entries[3][static_cast<std::size_t>(j)] = 0.0;
    return KnowledgeSpec(std::move(basis), std::move(entries));
}

}  // namespace phytaylor
