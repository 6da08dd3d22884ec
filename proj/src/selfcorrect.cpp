#include "phytaylor/selfcorrect.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "phytaylor/errors.hpp"

namespace phytaylor {

namespace {

constexpr double kSymmetryTol = 1e-12;

void check_symmetric_2x2(const Mat& p) {
    if (p.rows() != 2 || p.cols() != 2)
        throw UnsupportedDimension("safety quadratic: P must be 2x2");
    if (std::abs(p(0, 1) - p(1, 0)) > kSymmetryTol)
        throw InvalidArgument("safety quadratic: P must be symmetric");
}

}  // namespace

SafetyQuadratic::SafetyQuadratic(QuadraticSign sign, double b, Mat p)
    : sign_(sign), b_(b), p_(std::move(p)) {
    check_symmetric_2x2(p_);
    if (!std::isfinite(b_)) throw InvalidArgument("safety quadratic: offset must be finite");
}

double SafetyQuadratic::quad_form(const Vec& u) const {
    if (u.size() != 2) throw UnsupportedDimension("safety quadratic: command must have length 2");
    return p_(0, 0) * u[0] * u[0] + 2.0 * p_(0, 1) * u[0] * u[1] + p_(1, 1) * u[1] * u[1];
}

double SafetyQuadratic::evaluate(const Vec& u) const {
    const double q = quad_form(u);
    return sign_ == QuadraticSign::plus ? b_ + q : b_ - q;
}

void CommandBox::validate() const {
    if (lo.size() != hi.size() || lo.empty())
        throw InvalidArgument("command box: bounds must align");
    for (std::size_t c = 0; c < lo.size(); ++c)
        if (!(lo[c] <= hi[c]))
            throw InvalidArgument("command box: lower bound above upper bound in channel " +
                                  std::to_string(c + 1));
}

bool CommandBox::contains(const Vec& u, double tol) const {
    for (std::size_t c = 0; c < lo.size(); ++c)
        if (u[c] < lo[c] - tol || u[c] > hi[c] + tol) return false;
    return true;
}

Vec CommandBox::clamp(const Vec& u) const {
    Vec out = u;
    for (std::size_t c = 0; c < lo.size(); ++c) out[c] = std::clamp(out[c], lo[c], hi[c]);
    return out;
}

void CorrectionProblem::validate() const {
    if (s1.sign() != QuadraticSign::plus || s2.sign() != QuadraticSign::minus)
        throw InvalidArgument("correction problem: first metric must use plus, second minus");
    if (bounds.size() != 2) throw UnsupportedDimension("correction problem: need two bounds");
    if (!all_finite(bounds)) throw InvalidArgument("correction problem: bounds must be finite");
    box.validate();
    if (box.lo.size() != 2) throw UnsupportedDimension("correction problem: command box must be 2-d");
}

SymmetricEigen2 eigen_sym2(const Mat& p) {
    check_symmetric_2x2(p);
    const double a = p(0, 0);
    const double b = p(0, 1);
    const double c = p(1, 1);
    const double mean = 0.5 * (a + c);
    const double half_diff = 0.5 * (a - c);
    const double disc = std::sqrt(half_diff * half_diff + b * b);

    SymmetricEigen2 out;
    out.lambda1 = mean - disc;
    out.lambda2 = mean + disc;

    // Unit eigenvector (alpha, beta) of lambda1; the reflection
    // [[alpha, beta], [beta, -alpha]] then carries lambda2 in its second
    // column and is symmetric orthogonal by construction.
    double v1 = b;
    double v2 = out.lambda1 - a;
    const double alt1 = out.lambda1 - c;
    const double alt2 = b;
    if (v1 * v1 + v2 * v2 < alt1 * alt1 + alt2 * alt2) {
        v1 = alt1;
        v2 = alt2;
    }
    double n = std::sqrt(v1 * v1 + v2 * v2);
    if (n == 0.0) {
        v1 = 1.0;
        v2 = 0.0;
        n = 1.0;
    }
    out.q = Mat(2, 2);
    out.q(0, 0) = v1 / n;
    out.q(1, 0) = v2 / n;
    out.q(0, 1) = v2 / n;
    out.q(1, 1) = -v1 / n;
    return out;
}

std::vector<ExtractedQuadratic> extract_quadratics(const PhyTaylorModel& model) {
    if (model.input_dim() != 2)
        throw UnsupportedDimension("quadratic extraction: model input dim must be 2");
    for (const auto& layer : model.layers()) {
        for (const auto& ch : layer.suppressor)
            if (ch.active)
                throw ModelNotPolynomial("quadratic extraction: suppressor must be inactive");
        if (layer.activation == Activation::identity) continue;
        for (auto flag : layer.a)
            if (flag)
                throw ModelNotPolynomial(
                    "quadratic extraction: active non-identity activation in the cascade");
    }

    using Poly = std::map<std::pair<int, int>, double>;
    auto poly_mul = [](const Poly& x, const Poly& y) {
        Poly out;
        for (const auto& [ex, cx] : x)
            for (const auto& [ey, cy] : y)
                out[{ex.first + ey.first, ex.second + ey.second}] += cx * cy;
        return out;
    };

    std::vector<Poly> channels(2);
    channels[0][{1, 0}] = 1.0;
    channels[1][{0, 1}] = 1.0;

    for (int t = 0; t < model.layer_count(); ++t) {
        const PhnLayer& layer = model.layer(t);
        std::vector<Poly> monos(static_cast<std::size_t>(layer.basis.size()));
        for (int j = 0; j < layer.basis.size(); ++j) {
            Poly acc;
            acc[{0, 0}] = 1.0;
            const auto& exps = layer.basis.term(j).exponents;
            for (std::size_t c = 0; c < exps.size(); ++c)
                for (int e = 0; e < exps[c]; ++e) acc = poly_mul(acc, channels[c]);
            monos[static_cast<std::size_t>(j)] = std::move(acc);
        }
        std::vector<Poly> outputs(static_cast<std::size_t>(layer.out_dim));
        for (int i = 0; i < layer.out_dim; ++i) {
            Poly acc;
            for (int j = 0; j < layer.basis.size(); ++j) {
                double coeff = layer.K(i, j);
                if (layer.a[static_cast<std::size_t>(i)] && layer.M(i, j) != 0.0)
                    coeff += layer.W(i, j);
                if (coeff == 0.0) continue;
                for (const auto& [e, c] : monos[static_cast<std::size_t>(j)]) acc[e] += coeff * c;
            }
            outputs[static_cast<std::size_t>(i)] = std::move(acc);
        }
        channels = std::move(outputs);
    }

    std::vector<ExtractedQuadratic> result;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const Poly& poly = channels[i];
        auto coeff = [&](int e1, int e2) {
            auto it = poly.find({e1, e2});
            return it == poly.end() ? 0.0 : it->second;
        };
        const QuadraticSign sign = i == 1 ? QuadraticSign::minus : QuadraticSign::plus;
        const double flip = sign == QuadraticSign::minus ? -1.0 : 1.0;
        Mat p(2, 2);
        p(0, 0) = flip * coeff(2, 0);
        p(0, 1) = flip * coeff(1, 1) / 2.0;
        p(1, 0) = p(0, 1);
        p(1, 1) = flip * coeff(0, 2);

        ExtractedQuadratic out{SafetyQuadratic(sign, coeff(0, 0), std::move(p)),
                               {coeff(1, 0), coeff(0, 1)},
                               0.0};
        for (const auto& [e, c] : poly)
            if (e.first + e.second > 2) out.max_ignored_coeff = std::max(out.max_ignored_coeff, std::abs(c));
        result.push_back(std::move(out));
    }
    return result;
}

BoxExtremum quad_form_extremum(const Mat& p, const CommandBox& box, bool maximize) {
    check_symmetric_2x2(p);
    box.validate();
    const double p00 = p(0, 0), p01 = p(0, 1), p11 = p(1, 1);
    auto form = [&](double u1, double u2) {
        return p00 * u1 * u1 + 2.0 * p01 * u1 * u2 + p11 * u2 * u2;
    };

    std::vector<Vec> candidates = {
        {box.lo[0], box.lo[1]}, {box.lo[0], box.hi[1]}, {box.hi[0], box.lo[1]},
        {box.hi[0], box.hi[1]}};
    // Edge-interior critical points of the one-dimensional restrictions.
    for (double u1 : {box.lo[0], box.hi[0]}) {
        if (p11 != 0.0) {
            const double t = -p01 * u1 / p11;
            if (t >= box.lo[1] && t <= box.hi[1]) candidates.push_back({u1, t});
        }
    }
    for (double u2 : {box.lo[1], box.hi[1]}) {
        if (p00 != 0.0) {
            const double t = -p01 * u2 / p00;
            if (t >= box.lo[0] && t <= box.hi[0]) candidates.push_back({t, u2});
        }
    }
    // Interior stationary point: P u = 0 has the origin as its isolated
    // solution when P is regular; along null directions the form is constant,
    // so the edges already carry those extrema.
    Vec origin = {0.0, 0.0};
    if (box.contains(origin)) candidates.push_back(origin);

    BoxExtremum best{form(candidates[0][0], candidates[0][1]), candidates[0]};
    for (const Vec& cand : candidates) {
        const double value = form(cand[0], cand[1]);
        if (maximize ? value > best.value : value < best.value) best = {value, cand};
    }
    return best;
}

std::optional<Vec> verify_nonneg(const SafetyQuadratic& q, const CommandBox& box) {
    const bool plus = q.sign() == QuadraticSign::plus;
    BoxExtremum extremum = quad_form_extremum(q.p(), box, /*maximize=*/!plus);
    const double min_value =
        plus ? q.offset() + extremum.value : q.offset() - extremum.value;
    if (min_value < 0.0) return extremum.point;
    return std::nullopt;
}

SafetyQuadratic revise(const SafetyQuadratic& q, const CommandBox& box) {
    if (!verify_nonneg(q, box)) return q;

    if (q.sign() == QuadraticSign::plus) {
        SymmetricEigen2 eig = eigen_sym2(q.p());
        const double floor = std::max(1e-4 * eig.lambda2, 1e-8);
        const double l1 = std::max(eig.lambda1, floor);
        const double l2 = std::max(eig.lambda2, floor);
        Mat diag(2, 2);
        diag(0, 0) = l1;
        diag(1, 1) = l2;
        Mat p = eig.q.multiply(diag).multiply(eig.q);
        p(0, 1) = p(1, 0) = 0.5 * (p(0, 1) + p(1, 0));
        return SafetyQuadratic(QuadraticSign::plus, std::max(q.offset(), 0.0), std::move(p));
    }

    if (q.offset() < 0.0)
        throw Unrevisable("minus-sign quadratic with negative offset cannot be made non-negative");
    const double peak = quad_form_extremum(q.p(), box, /*maximize=*/true).value;
    if (peak <= q.offset()) return q;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (mid * peak <= q.offset() ? lo : hi) = mid;
    }
    Mat p = q.p();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) p(i, j) *= lo;
    return SafetyQuadratic(QuadraticSign::minus, q.offset(), std::move(p));
}

Vec correct_commands(const CorrectionProblem& problem, const Vec& u) {
    problem.validate();
    if (u.size() != 2) throw UnsupportedDimension("command correction: command must have length 2");

    const double s1_now = problem.s1.evaluate(u);
    const double s2_now = problem.s2.evaluate(u);
    const double c1 = problem.bounds[0];
    const double c2 = problem.bounds[1];
    if (s1_now <= c1 && s2_now <= c2) return u;

    const double c1_hat = std::min(s1_now, c1);
    const double c2_hat = std::min(s2_now, c2);

    SymmetricEigen2 eig = eigen_sym2(problem.s1.p());
    if (eig.lambda1 <= 0.0)
        throw DegenerateQuadratic("command correction: P1 must be positive definite");
    const Mat& q1 = eig.q;
    Mat s = q1.multiply(problem.s2.p()).multiply(q1);
    const double s11 = s(0, 0);
    const double s12 = 0.5 * (s(0, 1) + s(1, 0));
    const double s22 = s(1, 1);

    const double mu1 = (c1_hat - problem.s1.offset()) / eig.lambda1;
    const double lam = eig.lambda2 / eig.lambda1;
    const double bbar = problem.s2.offset() - c2_hat;

    const double w1 = s11 * s11 * lam * lam + s22 * s22 - 2.0 * s11 * s22 * lam +
                      4.0 * s12 * s12 * lam;
    const double w2 = 2.0 * bbar * s11 * lam - 2.0 * s11 * s11 * mu1 * lam - 2.0 * bbar * s22 +
                      2.0 * s11 * s22 * mu1 - 4.0 * s12 * s12 * mu1;
    const double w3 = bbar * bbar + s11 * s11 * mu1 * mu1 - 2.0 * bbar * s11 * mu1;

    if (std::abs(w1) < 1e-14)
        throw DegenerateQuadratic("command correction: quartic coefficient vanished");
    double disc = w2 * w2 - 4.0 * w1 * w3;
    if (disc < -1e-12) throw NoRealSolution("command correction: negative discriminant");
    disc = std::max(disc, 0.0);

    double z2_sq = (std::sqrt(disc) - w2) / (2.0 * w1);
    if (z2_sq < -1e-12) throw NoRealSolution("command correction: negative radicand for channel 2");
    z2_sq = std::max(z2_sq, 0.0);
    double z1_sq = mu1 - lam * z2_sq;
    if (z1_sq < -1e-12) throw NoRealSolution("command correction: negative radicand for channel 1");
    z1_sq = std::max(z1_sq, 0.0);

    const double z1 = std::sqrt(z1_sq);
    const double z2 = std::sqrt(z2_sq);

    // The quartic came from squaring the cross term, so only the sign
    // combinations that restore its sign solve the second equality; keep the
    // candidates that actually satisfy both.
    constexpr double kResidualTol = 1e-8;
    std::vector<Vec> valid;
    for (int sign1 : {+1, -1}) {
        for (int sign2 : {+1, -1}) {
            const Vec z = {sign1 * z1, sign2 * z2};
            const Vec cand = q1.apply(z);
            if (std::abs(problem.s1.evaluate(cand) - c1_hat) <= kResidualTol &&
                std::abs(problem.s2.evaluate(cand) - c2_hat) <= kResidualTol)
                valid.push_back(cand);
        }
    }
    if (valid.empty())
        throw NoRealSolution("command correction: no sign candidate satisfies both equalities");

    // Per-channel proximity; a disagreement between the channels falls back
    // to the jointly closest candidate.
    std::size_t best_theta = 0, best_gamma = 0, best_joint = 0;
    for (std::size_t k = 1; k < valid.size(); ++k) {
        if (std::abs(valid[k][0] - u[0]) < std::abs(valid[best_theta][0] - u[0])) best_theta = k;
        if (std::abs(valid[k][1] - u[1]) < std::abs(valid[best_gamma][1] - u[1])) best_gamma = k;
        const double dk = std::hypot(valid[k][0] - u[0], valid[k][1] - u[1]);
        const double db = std::hypot(valid[best_joint][0] - u[0], valid[best_joint][1] - u[1]);
        if (dk < db) best_joint = k;
    }
    const Vec& chosen = best_theta == best_gamma ? valid[best_theta] : valid[best_joint];

    Vec clamped = problem.box.clamp(chosen);
    if (clamped != chosen) {
        if (std::abs(problem.s1.evaluate(clamped) - c1_hat) > 1e-6 ||
            std::abs(problem.s2.evaluate(clamped) - c2_hat) > 1e-6)
            throw NoRealSolution("command correction: clamping to the box broke the equalities");
    }
    return clamped;
}

}  // namespace phytaylor
