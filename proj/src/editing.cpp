#include "phytaylor/editing.hpp"

#include <algorithm>

#include "phytaylor/errors.hpp"

namespace phytaylor {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw InvalidArgument("unknown activation: " + name);
}

PhyTaylorModel::PhyTaylorModel(std::vector<PhnLayer> layers, int input_dim, int terminal_out_dim)
    : layers_(std::move(layers)), input_dim_(input_dim), terminal_out_dim_(terminal_out_dim) {
    if (layers_.empty()) throw PlanInconsistent("model needs at least one layer");
    if (layers_.front().in_dim != input_dim_)
        throw PlanInconsistent("first layer input dim mismatch");
    for (std::size_t t = 1; t < layers_.size(); ++t)
        if (layers_[t].in_dim != layers_[t - 1].out_dim)
            throw PlanInconsistent("layer chaining broken at layer " + std::to_string(t));
    if (layers_.back().out_dim != terminal_out_dim_)
        throw PlanInconsistent("terminal layer out dim mismatch");
}

namespace {

struct BuildState {
    std::vector<PhnLayer> layers;
    // Dependency sets (first-layer monomial indices) of the current output
    // vector's entries.
    std::vector<std::set<int>> entry_sets;
    // Per terminal row i, the first-layer columns frozen by knowledge.
    std::vector<std::set<int>> masked_first;
    std::vector<std::uint8_t> a_first;  // activation mask of the spec rows
    int terminal_dim = 0;
};

std::vector<SuppressorChannel> resolve_suppressor(const std::vector<SuppressorChannel>& requested,
                                                  int in_dim, int protected_channels,
                                                  std::size_t layer_index) {
    std::vector<SuppressorChannel> channels(static_cast<std::size_t>(in_dim));
    if (!requested.empty()) {
        if (static_cast<int>(requested.size()) != in_dim)
            throw PlanInconsistent("layer " + std::to_string(layer_index + 1) + ": suppressor has " +
                                   std::to_string(requested.size()) + " channels, input has " +
                                   std::to_string(in_dim));
        channels = requested;
    }
    // Channels feeding the knowledge pass-through must stay untouched,
    // otherwise the pass-through block would carry chi(y) instead of y.
    for (int c = 0; c < std::min(protected_channels, in_dim); ++c)
        channels[static_cast<std::size_t>(c)] = SuppressorChannel{};
    return channels;
}

void build_first_layer(const KnowledgeSpec& spec, const LayerPlan& plan, BuildState& state) {
    const int n = spec.basis().input_dim();
    const int len_y = spec.out_dim();
    if (plan.out_dim < len_y)
        throw PlanInconsistent("first layer out_dim " + std::to_string(plan.out_dim) +
                               " is below the terminal dimension " + std::to_string(len_y));
    if (plan.order != spec.basis().order())
        throw KnowledgeUnrepresentable("spec basis order " + std::to_string(spec.basis().order()) +
                                       " differs from first layer order " +
                                       std::to_string(plan.order));

    EditedMasks base = first_layer_masks(spec);
    const int cols = spec.basis().size();

    PhnLayer layer;
    layer.in_dim = n;
    layer.out_dim = plan.out_dim;
    layer.order = plan.order;
    layer.basis = spec.basis();
    layer.K = Mat(plan.out_dim, cols);
    layer.M = Mat(plan.out_dim, cols);
    layer.W = Mat(plan.out_dim, cols);
    layer.a.assign(static_cast<std::size_t>(plan.out_dim), 1);
    layer.activation = plan.activation;
    // The first layer never suppresses (requested channels are ignored).
    layer.suppressor.assign(static_cast<std::size_t>(n), SuppressorChannel{});

    for (int i = 0; i < len_y; ++i) {
        for (int j = 0; j < cols; ++j) {
            layer.K(i, j) = base.K(i, j);
            layer.M(i, j) = base.M(i, j);
        }
        layer.a[static_cast<std::size_t>(i)] = base.a[static_cast<std::size_t>(i)];
    }
    for (int i = len_y; i < plan.out_dim; ++i)
        for (int j = 0; j < cols; ++j) layer.M(i, j) = 1.0;

    state.terminal_dim = len_y;
    state.a_first = base.a;
    state.masked_first.assign(static_cast<std::size_t>(len_y), {});
    for (int i = 0; i < len_y; ++i)
        for (int j = 0; j < cols; ++j)
            if (base.M(i, j) == 0.0) state.masked_first[static_cast<std::size_t>(i)].insert(j);

    auto spec_sets = dependency_sets(spec, base);
    state.entry_sets.assign(static_cast<std::size_t>(plan.out_dim), {});
    for (int i = 0; i < len_y; ++i)
        state.entry_sets[static_cast<std::size_t>(i)] = spec_sets[static_cast<std::size_t>(i)];
    std::set<int> full;
    for (int j = 0; j < cols; ++j) full.insert(j);
    for (int i = len_y; i < plan.out_dim; ++i)
        state.entry_sets[static_cast<std::size_t>(i)] = full;

    state.layers.push_back(std::move(layer));
}

std::vector<std::set<int>> monomial_closure(const MonomialBasis& basis,
                                            const std::vector<std::set<int>>& entry_sets) {
    std::vector<std::set<int>> closure(static_cast<std::size_t>(basis.size()));
    for (int j = 0; j < basis.size(); ++j) {
        const auto& exps = basis.term(j).exponents;
        for (std::size_t c = 0; c < exps.size(); ++c) {
            if (exps[c] == 0) continue;
            closure[static_cast<std::size_t>(j)].insert(entry_sets[c].begin(),
                                                        entry_sets[c].end());
        }
    }
    return closure;
}

bool intersects(const std::set<int>& a, const std::set<int>& b) {
    const std::set<int>& small = a.size() <= b.size() ? a : b;
    const std::set<int>& large = a.size() <= b.size() ? b : a;
    for (int v : small)
        if (large.count(v)) return true;
    return false;
}

void build_later_layer(const LayerPlan& plan, std::size_t index, BuildState& state) {
    const PhnLayer& prev = state.layers.back();
    const int in_dim = prev.out_dim;
    const int len_y = state.terminal_dim;
    if (plan.out_dim < len_y)
        throw PlanInconsistent("layer " + std::to_string(index + 1) + " out_dim " +
                               std::to_string(plan.out_dim) +
                               " is below the terminal dimension " + std::to_string(len_y));
    if (plan.order < 1)
        throw PlanInconsistent("layer " + std::to_string(index + 1) + ": order must be >= 1");

    PhnLayer layer;
    layer.in_dim = in_dim;
    layer.out_dim = plan.out_dim;
    layer.order = plan.order;
    layer.basis = build_basis(in_dim, plan.order);
    const int cols = layer.basis.size();
    layer.K = Mat(plan.out_dim, cols);
    layer.M = Mat(plan.out_dim, cols);
    layer.W = Mat(plan.out_dim, cols);
    layer.a.assign(static_cast<std::size_t>(plan.out_dim), 1);
    layer.activation = plan.activation;
    layer.suppressor = resolve_suppressor(plan.suppressor, in_dim, len_y, index);

    // Pass-through block: the identity over the degree-1 monomials of the
    // first len(y) input entries, so K * m(y_prev, r) == y_prev[0..len_y).
    for (int i = 0; i < len_y; ++i) layer.K(i, 1 + i) = 1.0;

    const auto closure = monomial_closure(layer.basis, state.entry_sets);
    for (int i = 0; i < plan.out_dim; ++i) {
        if (i >= len_y) {
            for (int j = 0; j < cols; ++j) layer.M(i, j) = 1.0;
            continue;
        }
        layer.a[static_cast<std::size_t>(i)] = state.a_first[static_cast<std::size_t>(i)];
        if (state.a_first[static_cast<std::size_t>(i)] == 0) {
            // Fully known row: the activation mask already silences the
            // trainable term, keep its mask row empty as well.
            continue;
        }
        const auto& masked = state.masked_first[static_cast<std::size_t>(i)];
        for (int j = 0; j < cols; ++j)
            layer.M(i, j) = intersects(closure[static_cast<std::size_t>(j)], masked) ? 0.0 : 1.0;
    }

    std::vector<std::set<int>> next_sets(static_cast<std::size_t>(plan.out_dim));
    for (int i = 0; i < plan.out_dim; ++i) {
        auto& dst = next_sets[static_cast<std::size_t>(i)];
        for (int j = 0; j < cols; ++j) {
            if (layer.K(i, j) == 0.0 && layer.M(i, j) == 0.0) continue;
            const auto& src = closure[static_cast<std::size_t>(j)];
            dst.insert(src.begin(), src.end());
        }
    }
    state.entry_sets = std::move(next_sets);
    state.layers.push_back(std::move(layer));
}

BuildState build_state(const KnowledgeSpec& spec, const std::vector<LayerPlan>& plan,
                       std::size_t layer_count) {
    if (plan.empty()) throw PlanInconsistent("layer plan is empty");
    if (plan.back().out_dim != spec.out_dim())
        throw PlanInconsistent("terminal out_dim " + std::to_string(plan.back().out_dim) +
                               " differs from spec out_dim " + std::to_string(spec.out_dim()));
    BuildState state;
    build_first_layer(spec, plan.front(), state);
    for (std::size_t t = 1; t < layer_count; ++t) build_later_layer(plan[t], t, state);
    return state;
}

}  // namespace

PhyTaylorModel build_model(const KnowledgeSpec& spec, const std::vector<LayerPlan>& plan) {
    BuildState state = build_state(spec, plan, plan.size());
    return PhyTaylorModel(std::move(state.layers), spec.basis().input_dim(), spec.out_dim());
}

std::vector<std::set<int>> entry_dependency_sets(const KnowledgeSpec& spec,
                                                 const std::vector<LayerPlan>& plan, int t) {
    if (t < 1 || t > static_cast<int>(plan.size()))
        throw InvalidArgument("entry_dependency_sets: layer index out of range");
    BuildState state = build_state(spec, plan, static_cast<std::size_t>(t));
    return state.entry_sets;
}

std::vector<std::set<int>> dependency_closure(const KnowledgeSpec& spec,
                                              const std::vector<LayerPlan>& plan, int t) {
    if (t < 1 || t >= static_cast<int>(plan.size()))
        throw InvalidArgument("dependency_closure: layer index out of range");
    BuildState state = build_state(spec, plan, static_cast<std::size_t>(t));
    const int in_dim = state.layers.back().out_dim;
    MonomialBasis basis = build_basis(in_dim, plan[static_cast<std::size_t>(t)].order);
    return monomial_closure(basis, state.entry_sets);
}

std::pair<std::int64_t, std::int64_t> parameter_counts(const PhyTaylorModel& model) {
    std::int64_t trainable = 0;
    std::int64_t frozen = 0;
    for (const auto& layer : model.layers()) {
        for (int i = 0; i < layer.M.rows(); ++i)
            for (int j = 0; j < layer.M.cols(); ++j)
                (layer.M(i, j) != 0.0 ? trainable : frozen) += 1;
    }
    return {trainable, frozen};
}

}  // namespace phytaylor
