#include "phytaylor/network.hpp"

#include <cmath>

#include "phytaylor/errors.hpp"
#include "phytaylor/suppressor.hpp"

namespace phytaylor {

double apply_activation(Activation act, double v) {
    switch (act) {
        case Activation::identity: return v;
        case Activation::tanh: return std::tanh(v);
        case Activation::relu: return v > 0.0 ? v : 0.0;
    }
    return v;
}

double activation_derivative(Activation act, double v) {
    switch (act) {
        case Activation::identity: return 1.0;
        case Activation::tanh: {
            const double t = std::tanh(v);
            return 1.0 - t * t;
        }
        case Activation::relu: return v > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

void init_weights(PhyTaylorModel& model, Rng& rng, double stddev) {
    for (int t = 0; t < model.layer_count(); ++t) {
        Mat& w = model.layer(t).W;
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) w(i, j) = rng.truncated_normal(0.0, stddev);
    }
}

namespace {

Vec masked_weights_apply(const PhnLayer& layer, const Vec& m) {
    // U * m with U = M (.) W
    Vec out(static_cast<std::size_t>(layer.out_dim), 0.0);
    for (int i = 0; i < layer.out_dim; ++i) {
        double acc = 0.0;
        for (int j = 0; j < layer.W.cols(); ++j) {
            if (layer.M(i, j) == 0.0) continue;
            acc += layer.W(i, j) * m[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

}  // namespace

ForwardTrace forward(const PhyTaylorModel& model, const Vec& x) {
    if (static_cast<int>(x.size()) != model.input_dim())
        throw DimensionMismatch("forward: input has " + std::to_string(x.size()) +
                                " entries, model expects " + std::to_string(model.input_dim()));
    if (!all_finite(x)) throw NonFiniteValue("forward: non-finite input");

    ForwardTrace trace;
    trace.layers.reserve(static_cast<std::size_t>(model.layer_count()));
    Vec current = x;
    for (int t = 0; t < model.layer_count(); ++t) {
        const PhnLayer& layer = model.layer(t);
        LayerTrace lt;
        lt.input = current;
        lt.suppressed = current;
        for (int c = 0; c < layer.in_dim; ++c)
            lt.suppressed[static_cast<std::size_t>(c)] =
                suppress(current[static_cast<std::size_t>(c)],
                         layer.suppressor[static_cast<std::size_t>(c)]);
        lt.monomials = evaluate(layer.basis, lt.suppressed);
        lt.pre_activation = masked_weights_apply(layer, lt.monomials);
        lt.activated.resize(static_cast<std::size_t>(layer.out_dim));
        Vec knowledge_part = layer.K.apply(lt.monomials);
        Vec y(static_cast<std::size_t>(layer.out_dim));
        for (int i = 0; i < layer.out_dim; ++i) {
            const double act = apply_activation(layer.activation,
                                                lt.pre_activation[static_cast<std::size_t>(i)]);
            lt.activated[static_cast<std::size_t>(i)] = act;
            y[static_cast<std::size_t>(i)] =
                knowledge_part[static_cast<std::size_t>(i)] +
                (layer.a[static_cast<std::size_t>(i)] ? act : 0.0);
        }
        if (!all_finite(y))
            throw NonFiniteValue("forward: non-finite value in layer " + std::to_string(t + 1));
        trace.layers.push_back(std::move(lt));
        current = std::move(y);
    }
    trace.output = std::move(current);
    return trace;
}

Vec predict(const PhyTaylorModel& model, const Vec& x) { return forward(model, x).output; }

GradientSet backward(const PhyTaylorModel& model, const ForwardTrace& trace,
                     const Vec& output_grad) {
    if (static_cast<int>(trace.layers.size()) != model.layer_count())
        throw DimensionMismatch("backward: trace does not match model depth");
    if (static_cast<int>(output_grad.size()) != model.terminal_out_dim())
        throw DimensionMismatch("backward: output gradient has wrong length");

    GradientSet grads;
    grads.weight_grads.resize(static_cast<std::size_t>(model.layer_count()));

    Vec dy = output_grad;
    for (int t = model.layer_count() - 1; t >= 0; --t) {
        const PhnLayer& layer = model.layer(t);
        const LayerTrace& lt = trace.layers[static_cast<std::size_t>(t)];
        if (static_cast<int>(dy.size()) != layer.out_dim)
            throw DimensionMismatch("backward: gradient shape mismatch at layer " +
                                    std::to_string(t + 1));

        // dL/d(pre-activation), including the activation mask.
        Vec dpre(static_cast<std::size_t>(layer.out_dim), 0.0);
        for (int i = 0; i < layer.out_dim; ++i) {
            if (!layer.a[static_cast<std::size_t>(i)]) continue;
            dpre[static_cast<std::size_t>(i)] =
                dy[static_cast<std::size_t>(i)] *
                activation_derivative(layer.activation,
                                      lt.pre_activation[static_cast<std::size_t>(i)]);
        }

        Mat& dw = grads.weight_grads[static_cast<std::size_t>(t)];
        dw = Mat(layer.out_dim, layer.W.cols());
        for (int i = 0; i < layer.out_dim; ++i) {
            const double g = dpre[static_cast<std::size_t>(i)];
            if (g == 0.0) continue;
            for (int j = 0; j < dw.cols(); ++j) {
                if (layer.M(i, j) == 0.0) continue;  // frozen positions stay exactly zero
                dw(i, j) = g * lt.monomials[static_cast<std::size_t>(j)];
            }
        }

        // dL/dm = K^T dy + U^T dpre
        Vec dm = layer.K.apply_transposed(dy);
        for (int i = 0; i < layer.out_dim; ++i) {
            const double g = dpre[static_cast<std::size_t>(i)];
            if (g == 0.0) continue;
            for (int j = 0; j < layer.W.cols(); ++j) {
                if (layer.M(i, j) == 0.0) continue;
                dm[static_cast<std::size_t>(j)] += layer.W(i, j) * g;
            }
        }

        // dL/d(suppressed input) through the monomial map.
        Mat mono_jac = jacobian(layer.basis, lt.suppressed);
        Vec ds = mono_jac.apply_transposed(dm);

        // dL/d(raw input) through the suppressor.
        Vec dx(static_cast<std::size_t>(layer.in_dim));
        for (int c = 0; c < layer.in_dim; ++c)
            dx[static_cast<std::size_t>(c)] =
                ds[static_cast<std::size_t>(c)] *
                suppress_derivative(lt.input[static_cast<std::size_t>(c)],
                                    layer.suppressor[static_cast<std::size_t>(c)]);
        dy = std::move(dx);
    }
    grads.input_grad = std::move(dy);
    return grads;
}

namespace {

// K + diag(a (.) act'(pre)) * U for one layer, evaluated on a trace.
Mat layer_linearization(const PhnLayer& layer, const LayerTrace& lt) {
    Mat lin = layer.K;
    for (int i = 0; i < layer.out_dim; ++i) {
        if (!layer.a[static_cast<std::size_t>(i)]) continue;
        const double d = activation_derivative(layer.activation,
                                               lt.pre_activation[static_cast<std::size_t>(i)]);
        for (int j = 0; j < lin.cols(); ++j) {
            if (layer.M(i, j) == 0.0) continue;
            lin(i, j) += d * layer.W(i, j);
        }
    }
    return lin;
}

}  // namespace

Mat input_jacobian(const PhyTaylorModel& model, const Vec& x, int layer_count) {
    const int depth = layer_count < 0 ? model.layer_count() : layer_count;
    if (depth < 1 || depth > model.layer_count())
        throw InvalidArgument("input_jacobian: bad layer count");
    ForwardTrace trace = forward(model, x);

    Mat jac = layer_linearization(model.layer(0), trace.layers[0]);
    for (int t = 1; t < depth; ++t) {
        const PhnLayer& layer = model.layer(t);
        const LayerTrace& lt = trace.layers[static_cast<std::size_t>(t)];
        Mat lin = layer_linearization(layer, lt);     // out_t x len(m_t)
        Mat mono = jacobian(layer.basis, lt.suppressed);  // len(m_t) x in_t
        // Fold the per-channel suppressor derivative into the monomial jacobian.
        for (int c = 0; c < layer.in_dim; ++c) {
            const double d = suppress_derivative(lt.input[static_cast<std::size_t>(c)],
                                                 layer.suppressor[static_cast<std::size_t>(c)]);
            if (d == 1.0) continue;
            for (int k = 0; k < mono.rows(); ++k) mono(k, c) *= d;
        }
        jac = lin.multiply(mono).multiply(jac);
    }

    // Restrict to the terminal rows; for a prefix of the cascade these are the
    // knowledge-carrying entries.
    const int rows = model.terminal_out_dim();
    if (jac.rows() == rows) return jac;
    Mat out(rows, jac.cols());
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < jac.cols(); ++j) out(i, j) = jac(i, j);
    return out;
}

Mat raw_input_jacobian(const PhyTaylorModel& model, const Vec& x) {
    Mat jac = input_jacobian(model, x);
    Mat mono = jacobian(model.layer(0).basis, x);  // layer 1 never suppresses
    return jac.multiply(mono);
}

double compliance_deviation(const PhyTaylorModel& model, const KnowledgeSpec& spec, const Vec& x,
                            long* count_out) {
    Mat jac = input_jacobian(model, x);
    if (jac.rows() != spec.out_dim() || jac.cols() != spec.basis().size())
        throw DimensionMismatch("compliance check: model/spec shape mismatch");
    double worst = 0.0;
    long count = 0;
    for (int i = 0; i < spec.out_dim(); ++i) {
        for (int j = 0; j < spec.basis().size(); ++j) {
            const auto& e = spec.entry(i, j);
            if (!e.has_value()) continue;
            ++count;
            worst = std::max(worst, std::abs(jac(i, j) - *e));
        }
    }
    if (count_out) *count_out = count;
    return worst;
}

}  // namespace phytaylor
