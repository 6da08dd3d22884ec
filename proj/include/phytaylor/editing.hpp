#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "phytaylor/knowledge.hpp"
#include "phytaylor/linalg.hpp"
#include "phytaylor/monomial.hpp"
#include "phytaylor/suppressor.hpp"

namespace phytaylor {

enum class Activation { identity, tanh, relu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// One physics-compatible layer. The trainable weights W participate in the
// output only through U = M (.) W; entries with M == 0 are frozen.
struct PhnLayer {
    int in_dim = 0;
    int out_dim = 0;
    int order = 0;
    MonomialBasis basis;  // over in_dim, degree <= order
    Mat K;                // out_dim x basis.size()
    Mat M;                // binary, same shape
    Mat W;                // trainable storage, same shape
    std::vector<std::uint8_t> a;  // activation mask, out_dim
    Activation activation = Activation::tanh;
    std::vector<SuppressorChannel> suppressor;  // per input channel, size in_dim
};

// Requested shape of one layer; the builder derives K/M/a itself.
struct LayerPlan {
    int out_dim = 0;
    int order = 1;
    Activation activation = Activation::tanh;
    // Per input channel of this layer; empty means all inactive. The builder
    // forces channels carrying the knowledge pass-through inactive.
    std::vector<SuppressorChannel> suppressor;
};

class PhyTaylorModel {
public:
    PhyTaylorModel(std::vector<PhnLayer> layers, int input_dim, int terminal_out_dim);

    int input_dim() const { return input_dim_; }
    int terminal_out_dim() const { return terminal_out_dim_; }
    int first_order() const { return layers_.front().order; }
    int layer_count() const { return static_cast<int>(layers_.size()); }
    const PhnLayer& layer(int t) const { return layers_[static_cast<std::size_t>(t)]; }
    PhnLayer& layer(int t) { return layers_[static_cast<std::size_t>(t)]; }
    const std::vector<PhnLayer>& layers() const { return layers_; }

private:
    std::vector<PhnLayer> layers_;
    int input_dim_ = 0;
    int terminal_out_dim_ = 0;
};

// Assembles the edited cascade. Layer 1 masks come from the spec (rows past
// the terminal dimension are free latent rows); layers t >= 2 get the
// knowledge pass-through block and dependency cuts. Throws PlanInconsistent
// on dimension violations and KnowledgeUnrepresentable when the first plan
// order differs from the spec basis order.
PhyTaylorModel build_model(const KnowledgeSpec& spec, const std::vector<LayerPlan>& plan);

// Per-entry dependency sets of layer `t`'s input vector y_{t-1}, expressed as
// first-layer monomial indices. Entry k <= terminal dim carries exactly the
// spec's D_k; latent entries accumulate everything they can reach.
std::vector<std::set<int>> entry_dependency_sets(const KnowledgeSpec& spec,
                                                 const std::vector<LayerPlan>& plan,
                                                 int t);

// Dependency of each layer-t monomial on each first-layer monomial index:
// result[j] is the union of the factor entries' sets.
std::vector<std::set<int>> dependency_closure(const KnowledgeSpec& spec,
                                              const std::vector<LayerPlan>& plan, int t);

// (trainable, frozen) weight-slot counts over all layers.
std::pair<std::int64_t, std::int64_t> parameter_counts(const PhyTaylorModel& model);

}  // namespace phytaylor
