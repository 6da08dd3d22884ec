#pragma once

#include <vector>

#include "phytaylor/editing.hpp"
#include "phytaylor/linalg.hpp"
#include "phytaylor/rng.hpp"

namespace phytaylor {

// Per-layer cache from one forward pass, consumed by backward().
struct LayerTrace {
    Vec input;          // layer input y_{t-1}
    Vec suppressed;     // after per-channel suppression
    Vec monomials;      // m(suppressed, r_t)
    Vec pre_activation; // U * m
    Vec activated;      // act(U * m)
};

struct ForwardTrace {
    std::vector<LayerTrace> layers;
    Vec output;
};

// dL/dW per layer; masked positions are exactly zero.
struct GradientSet {
    std::vector<Mat> weight_grads;
    Vec input_grad;  // dL/dx, used by the dual-network objective
};

// Draws every weight entry from a truncated normal (mean 0, redraw beyond two
// standard deviations). The draw count does not depend on the masks, so equal
// seeds give equal initial weights across differently edited models.
void init_weights(PhyTaylorModel& model, Rng& rng, double stddev = 0.1);

// Per layer: suppress (never layer 1) -> augment -> K*m + a (.) act(U*m).
// Throws NonFiniteValue naming the layer when a non-finite value appears.
ForwardTrace forward(const PhyTaylorModel& model, const Vec& x);

Vec predict(const PhyTaylorModel& model, const Vec& x);

// Exact gradients of a scalar loss with dL/dy_hat = output_grad.
GradientSet backward(const PhyTaylorModel& model, const ForwardTrace& trace,
                     const Vec& output_grad);

// d y_hat / d m(x, r1), treating the first layer's monomial coordinates as
// independent. Evaluated at x; shape terminal_out_dim x len(m(x, r1)).
// `layer_count` < 0 evaluates the whole cascade, otherwise the prefix, with
// rows restricted to the terminal dimension.
Mat input_jacobian(const PhyTaylorModel& model, const Vec& x, int layer_count = -1);

// Diagnostic d y_hat / d x (through the monomial map of layer 1).
Mat raw_input_jacobian(const PhyTaylorModel& model, const Vec& x);

// Max |J[i][j] - A[i][j]| over the spec's known positions at the given input;
// the model must have been built from `spec`. Returns 0 when the spec has no
// known entries (count_out reports how many positions were checked).
double compliance_deviation(const PhyTaylorModel& model, const KnowledgeSpec& spec, const Vec& x,
                            long* count_out = nullptr);

double apply_activation(Activation act, double v);
double activation_derivative(Activation act, double v);

}  // namespace phytaylor
