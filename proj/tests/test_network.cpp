#include <doctest.h>

#include <cmath>
#include <thread>

#include "fixtures.hpp"
#include "phytaylor/errors.hpp"
#include "phytaylor/network.hpp"
#include "phytaylor/rng.hpp"

using namespace phytaylor;

namespace {

Vec random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
    Vec x(static_cast<std::size_t>(n));
    for (double& v : x) v = rng.uniform(lo, hi);
    return x;
}

double mse_loss(const PhyTaylorModel& model, const Vec& x, const Vec& target) {
    const Vec y = predict(model, x);
    double acc = 0.0;
    for (std::size_t d = 0; d < y.size(); ++d) {
        const double diff = y[d] - target[d];
        acc += diff * diff;
    }
    return acc;
}

// Central finite differences of the scalar loss with respect to every
// trainable weight entry.
void check_gradients(PhyTaylorModel& model, const Vec& x, const Vec& target, double rel_tol) {
    ForwardTrace trace = forward(model, x);
    Vec dy(trace.output.size());
    for (std::size_t d = 0; d < dy.size(); ++d) dy[d] = 2.0 * (trace.output[d] - target[d]);
    GradientSet grads = backward(model, trace, dy);

    const double h = 1e-6;
    for (int t = 0; t < model.layer_count(); ++t) {
        PhnLayer& layer = model.layer(t);
        for (int i = 0; i < layer.W.rows(); ++i) {
            for (int j = 0; j < layer.W.cols(); ++j) {
                const double analytic = grads.weight_grads[static_cast<std::size_t>(t)](i, j);
                if (layer.M(i, j) == 0.0) {
                    CHECK(analytic == 0.0);
                    continue;
                }
                const double saved = layer.W(i, j);
                layer.W(i, j) = saved + h;
                const double up = mse_loss(model, x, target);
                layer.W(i, j) = saved - h;
                const double dn = mse_loss(model, x, target);
                layer.W(i, j) = saved;
                const double fd = (up - dn) / (2.0 * h);
                const double scale = std::max({1e-4, std::abs(fd), std::abs(analytic)});
                CHECK(std::abs(fd - analytic) / scale <= rel_tol);
            }
        }
    }
}

}  // namespace

TEST_CASE("zero-weight forward is the pure knowledge map") {
    KnowledgeSpec dense = KnowledgeSpec::all_unknown(build_basis(3, 2), 3);
    PhyTaylorModel plain = build_model(dense, {{3, 2, Activation::identity, {}}});
    CHECK(predict(plain, {0.3, -0.7, 1.1}) == Vec{0.0, 0.0, 0.0});

    // All known values of the worked spec are zeros, so its physics part is
    // the zero map as well.
    PhyTaylorModel worked = build_model(testfix::example_spec(), {{3, 2, Activation::tanh, {}}});
    CHECK(predict(worked, {0.5, 1.2, -0.3}) == Vec{0.0, 0.0, 0.0});

    PhyTaylorModel vehicle = testfix::vehicle_spec().basis().input_dim() == 6
                                 ? build_model(testfix::vehicle_spec(),
                                               {{6, 2, Activation::tanh, {}}})
                                 : plain;
    const Vec x = {0.5, -0.2, 0.1, 1.0, 0.4, -0.3};
    const Vec y = predict(vehicle, x);
    const double T = testfix::default_vehicle().sampling_period;
    CHECK(y[0] == doctest::Approx(x[0] + T * x[3]).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(x[1] + T * x[4]).epsilon(1e-15));
    CHECK(y[2] == doctest::Approx(x[2] + T * x[5]).epsilon(1e-15));
    CHECK(y[3] == 0.0);
    CHECK(y[4] == 0.0);
    CHECK(y[5] == 0.0);
}

TEST_CASE("single wide-order network evaluates its polynomial") {
    KnowledgeSpec spec = KnowledgeSpec::all_unknown(build_basis(2, 4), 1);
    PhyTaylorModel model = build_model(spec, {{1, 4, Activation::identity, {}}});
    const Vec w = {0.0,  0.7, -0.3, 0.2,  0.9, -0.5, 0.1, 0.4,
                   -0.6, 0.8, 0.05, -0.2, 0.3, -0.1, 0.6};
    REQUIRE(model.layer(0).W.cols() == 15);
    for (int j = 0; j < 15; ++j) model.layer(0).W(0, j) = w[static_cast<std::size_t>(j)];

    // Independent evaluation of the same degree-4 polynomial.
    auto oracle = [&](double x1, double x2) {
        return w[1] * x1 + w[2] * x2 + w[3] * x1 * x1 + w[4] * x1 * x2 + w[5] * x2 * x2 +
               w[6] * std::pow(x1, 3) + w[7] * x1 * x1 * x2 + w[8] * x1 * x2 * x2 +
               w[9] * std::pow(x2, 3) + w[10] * std::pow(x1, 4) + w[11] * std::pow(x1, 3) * x2 +
               w[12] * x1 * x1 * x2 * x2 + w[13] * x1 * std::pow(x2, 3) + w[14] * std::pow(x2, 4);
    };
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const double x1 = rng.uniform(-1.5, 1.5);
        const double x2 = rng.uniform(-1.5, 1.5);
        const Vec y = predict(model, {x1, x2});
        CHECK(y[0] == doctest::Approx(oracle(x1, x2)).epsilon(1e-12));
    }
}

TEST_CASE("single-layer linear-regression gradient") {
    KnowledgeSpec spec = KnowledgeSpec::all_unknown(build_basis(2, 1), 1);
    PhyTaylorModel model = build_model(spec, {{1, 1, Activation::identity, {}}});
    model.layer(0).W(0, 1) = 0.4;
    model.layer(0).W(0, 2) = -0.2;

    const Vec x = {1.5, -0.5};
    const Vec target = {2.0};
    ForwardTrace trace = forward(model, x);
    Vec dy = {2.0 * (trace.output[0] - target[0])};
    GradientSet grads = backward(model, trace, dy);

    const Vec m = evaluate(model.layer(0).basis, x);
    for (int j = 0; j < 3; ++j)
        CHECK(grads.weight_grads[0](0, j) ==
              doctest::Approx(dy[0] * m[static_cast<std::size_t>(j)]).epsilon(1e-14));
}

TEST_CASE("gradients match finite differences across architectures") {
    Rng rng(29);

    SUBCASE("single tanh layer with knowledge") {
        KnowledgeSpec spec = testfix::example_spec();
        PhyTaylorModel model = build_model(spec, {{3, 2, Activation::tanh, {}}});
        init_weights(model, rng, 0.3);
        for (int probe = 0; probe < 12; ++probe)
            check_gradients(model, random_vec(rng, 3), random_vec(rng, 3), 1e-4);
    }

    SUBCASE("two-layer cascade, tanh then identity") {
        KnowledgeSpec spec = testfix::vehicle_spec();
        PhyTaylorModel model = build_model(
            spec, {{7, 2, Activation::tanh, {}}, {6, 2, Activation::identity, {}}});
        init_weights(model, rng, 0.3);
        for (int probe = 0; probe < 8; ++probe)
            check_gradients(model, random_vec(rng, 6), random_vec(rng, 6), 1e-4);
    }

    SUBCASE("relu cascade with a suppressed latent channel") {
        KnowledgeSpec spec = testfix::example_spec();
        std::vector<SuppressorChannel> channels(5);
        channels[3] = SuppressorChannel{true, -1.0, 1.25, true};
        channels[4] = SuppressorChannel{true, 0.5, 0.75, true};
        PhyTaylorModel model = build_model(
            spec, {{5, 2, Activation::relu, {}}, {3, 2, Activation::relu, channels}});
        init_weights(model, rng, 0.3);
        int done = 0;
        while (done < 8) {
            const Vec x = random_vec(rng, 3);
            // Keep clear of the relu and suppressor kinks so the central
            // difference stays two-sided.
            ForwardTrace trace = forward(model, x);
            bool near_kink = false;
            for (const auto& lt : trace.layers) {
                for (double v : lt.pre_activation)
                    if (std::abs(v) < 1e-3) near_kink = true;
                for (double v : lt.input)
                    if (std::abs(v) < 1e-3) near_kink = true;
            }
            if (near_kink) continue;
            check_gradients(model, x, random_vec(rng, 3), 1e-4);
            ++done;
        }
    }
}

TEST_CASE("input jacobian complies with the knowledge at every prefix") {
    Rng rng(31);
    KnowledgeSpec spec = testfix::vehicle_spec();
    PhyTaylorModel model = build_model(
        spec, {{7, 2, Activation::tanh, {}}, {6, 2, Activation::identity, {}}});
    for (int draw = 0; draw < 10; ++draw) {
        init_weights(model, rng, 0.5);
        const Vec x = random_vec(rng, 6);
        for (int depth = 1; depth <= 2; ++depth) {
            Mat jac = input_jacobian(model, x, depth);
            for (int i = 0; i < spec.out_dim(); ++i)
                for (int j = 0; j < spec.basis().size(); ++j)
                    if (spec.entry(i, j).has_value())
                        CHECK(std::abs(jac(i, j) - *spec.entry(i, j)) <= 1e-9);
        }
        CHECK(compliance_deviation(model, spec, x) <= 1e-9);
    }
}

TEST_CASE("compliance holds for random specs, plans and weights") {
    Rng rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = rng.uniform_int(2, 4);
        const int r = rng.uniform_int(1, 3);
        const int out = rng.uniform_int(1, 3);
        MonomialBasis basis = build_basis(n, r);

        std::vector<std::vector<KnowledgeEntry>> rows(
            static_cast<std::size_t>(out),
            std::vector<KnowledgeEntry>(static_cast<std::size_t>(basis.size()), std::nullopt));
        for (auto& row : rows) {
            for (auto& entry : row) {
                const double dice = rng.uniform01();
                if (dice < 0.3)
                    entry = 0.0;  // known zero
                else if (dice < 0.45)
                    entry = rng.uniform(-1.0, 1.0);  // known value
            }
        }
        if (trial % 7 == 0)  // a row that is known to be identically zero
            for (auto& entry : rows[0]) entry = 0.0;
        KnowledgeSpec spec(basis, rows);

        const int depth = rng.uniform_int(1, 3);
        std::vector<LayerPlan> plan;
        for (int t = 0; t < depth; ++t) {
            LayerPlan layer;
            layer.out_dim = t + 1 == depth ? out : out + rng.uniform_int(0, 2);
            layer.order = t == 0 ? r : rng.uniform_int(1, 2);
            layer.activation = rng.uniform01() < 0.5 ? Activation::tanh : Activation::identity;
            if (t > 0 && rng.uniform01() < 0.5) {
                const int in_dim = plan.back().out_dim;
                layer.suppressor.assign(static_cast<std::size_t>(in_dim), SuppressorChannel{});
                for (int c = out; c < in_dim; ++c)
                    layer.suppressor[static_cast<std::size_t>(c)] =
                        SuppressorChannel{true, rng.uniform(-1.0, 1.0), rng.uniform(0.5, 2.0),
                                          rng.uniform01() < 0.5};
            }
            plan.push_back(std::move(layer));
        }

        PhyTaylorModel model = build_model(spec, plan);
        init_weights(model, rng, 0.4);
        Vec x(static_cast<std::size_t>(n));
        for (double& v : x) v = rng.uniform(-1.5, 1.5);
        CHECK(compliance_deviation(model, spec, x) <= 1e-9);
    }
}

TEST_CASE("all-known single layer has jacobian equal to its knowledge matrix") {
    MonomialBasis basis = build_basis(2, 2);
    std::vector<std::vector<KnowledgeEntry>> rows = {
        {0.5, 1.0, -1.0, 0.25, 0.0, 2.0},
        {0.0, 0.0, 3.0, 0.0, -0.5, 0.0},
    };
    KnowledgeSpec spec(std::move(basis), std::move(rows));
    PhyTaylorModel model = build_model(spec, {{2, 2, Activation::identity, {}}});
    Mat jac = input_jacobian(model, {0.7, -0.4});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 6; ++j) CHECK(jac(i, j) == model.layer(0).K(i, j));
}

TEST_CASE("unconstrained jacobians match finite differences") {
    Rng rng(37);

    SUBCASE("single layer, differentiate against the monomial coordinates") {
        KnowledgeSpec spec = KnowledgeSpec::all_unknown(build_basis(2, 2), 2);
        PhyTaylorModel model = build_model(spec, {{2, 2, Activation::tanh, {}}});
        init_weights(model, rng, 0.4);
        const Vec x = {0.3, -0.8};
        Mat jac = input_jacobian(model, x);

        const PhnLayer& layer = model.layer(0);
        Vec m = evaluate(layer.basis, x);
        auto eval_on_m = [&](const Vec& coords) {
            Vec y(2, 0.0);
            for (int i = 0; i < 2; ++i) {
                double pre = 0.0;
                double know = 0.0;
                for (int j = 0; j < layer.W.cols(); ++j) {
                    know += layer.K(i, j) * coords[static_cast<std::size_t>(j)];
                    if (layer.M(i, j) != 0.0) pre += layer.W(i, j) * coords[static_cast<std::size_t>(j)];
                }
                y[static_cast<std::size_t>(i)] = know + std::tanh(pre);
            }
            return y;
        };
        const double h = 1e-6;
        for (int j = 0; j < layer.W.cols(); ++j) {
            Vec hi = m, lo = m;
            hi[static_cast<std::size_t>(j)] += h;
            lo[static_cast<std::size_t>(j)] -= h;
            const Vec up = eval_on_m(hi), dn = eval_on_m(lo);
            for (int i = 0; i < 2; ++i) {
                const double fd = (up[static_cast<std::size_t>(i)] - dn[static_cast<std::size_t>(i)]) / (2.0 * h);
                CHECK(jac(i, j) == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }

    SUBCASE("raw-input jacobian of a cascade") {
        KnowledgeSpec spec = KnowledgeSpec::all_unknown(build_basis(3, 2), 3);
        PhyTaylorModel model = build_model(
            spec, {{4, 2, Activation::tanh, {}}, {3, 2, Activation::tanh, {}}});
        init_weights(model, rng, 0.4);
        const Vec x = {0.4, -0.2, 0.9};
        Mat jac = raw_input_jacobian(model, x);
        const double h = 1e-6;
        for (int c = 0; c < 3; ++c) {
            Vec hi = x, lo = x;
            hi[static_cast<std::size_t>(c)] += h;
            lo[static_cast<std::size_t>(c)] -= h;
            const Vec up = predict(model, hi), dn = predict(model, lo);
            for (int i = 0; i < 3; ++i) {
                const double fd = (up[static_cast<std::size_t>(i)] - dn[static_cast<std::size_t>(i)]) / (2.0 * h);
                CHECK(jac(i, c) == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("forward determinism and non-finite reporting") {
    Rng rng(41);
    KnowledgeSpec spec = testfix::example_spec();
    PhyTaylorModel model = build_model(spec, {{3, 2, Activation::tanh, {}}});
    init_weights(model, rng, 0.3);
    const Vec x = {0.2, -0.4, 0.6};
    const Vec a = predict(model, x);
    const Vec b = predict(model, x);
    CHECK(a == b);

    CHECK_THROWS_AS(predict(model, {0.1, std::nan(""), 0.0}), NonFiniteValue);

    model.layer(0).W(0, 1) = 1e308;
    model.layer(0).W(0, 2) = 1e308;
    try {
        KnowledgeSpec dense = KnowledgeSpec::all_unknown(build_basis(2, 2), 1);
        PhyTaylorModel hot = build_model(dense, {{1, 2, Activation::identity, {}}});
        hot.layer(0).W(0, 1) = 1e308;
        hot.layer(0).W(0, 2) = 1e308;
        predict(hot, {1e200, 1e200});
        FAIL("expected NonFiniteValue");
    } catch (const NonFiniteValue& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("forward is identical across concurrent callers") {
    Rng rng(47);
    KnowledgeSpec spec = testfix::vehicle_spec();
    PhyTaylorModel model = build_model(
        spec, {{7, 2, Activation::tanh, {}}, {6, 2, Activation::identity, {}}});
    init_weights(model, rng, 0.3);
    const Vec x = {0.4, -0.1, 0.3, 0.9, -0.5, 0.2};
    const Vec serial = predict(model, x);

    std::vector<Vec> results(8);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < results.size(); ++w)
        workers.emplace_back([&, w] {
            for (int rep = 0; rep < 50; ++rep) results[w] = predict(model, x);
        });
    for (auto& t : workers) t.join();
    for (const Vec& r : results) CHECK(r == serial);
}

TEST_CASE("weight init draw count ignores the masks") {
    KnowledgeSpec spec = testfix::vehicle_spec();
    PhyTaylorModel edited = build_model(spec, {{6, 2, Activation::tanh, {}}});
    KnowledgeSpec dense = KnowledgeSpec::all_unknown(build_basis(6, 2), 6);
    PhyTaylorModel plain = build_model(dense, {{6, 2, Activation::tanh, {}}});
    Rng rng_a(99), rng_b(99);
    init_weights(edited, rng_a, 0.1);
    init_weights(plain, rng_b, 0.1);
    CHECK(edited.layer(0).W.data() == plain.layer(0).W.data());
}
