#pragma once

#include <optional>
#include <vector>

#include "phytaylor/editing.hpp"
#include "phytaylor/linalg.hpp"

namespace phytaylor {

enum class QuadraticSign { plus, minus };

// One safety relation s(u) = b + u^T P u (plus) or s(u) = b - u^T P u
// (minus) over a two-dimensional command vector. The first metric of the
// correction problem uses plus, the second minus.
class SafetyQuadratic {
public:
    SafetyQuadratic(QuadraticSign sign, double b, Mat p);

    QuadraticSign sign() const { return sign_; }
    double offset() const { return b_; }
    const Mat& p() const { return p_; }

    double quad_form(const Vec& u) const;  // u^T P u
    double evaluate(const Vec& u) const;   // b +/- u^T P u

private:
    QuadraticSign sign_;
    double b_;
    Mat p_;
};

// Per-channel closed intervals for the command vector.
struct CommandBox {
    Vec lo;
    Vec hi;

    void validate() const;
    bool contains(const Vec& u, double tol = 0.0) const;
    Vec clamp(const Vec& u) const;
};

struct CorrectionProblem {
    SafetyQuadratic s1;  // plus sign
    SafetyQuadratic s2;  // minus sign
    Vec bounds;          // safety bounds c, length 2
    CommandBox box;

    void validate() const;
};

// Closed-form spectral decomposition of a symmetric 2x2 matrix with
// lambda1 <= lambda2 and Q chosen symmetric orthogonal (an involution), so
// Q == Q^T == Q^{-1} exactly.
struct SymmetricEigen2 {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Mat q;  // 2x2
};

SymmetricEigen2 eigen_sym2(const Mat& p);

// Coefficients read off a purely polynomial safety network: offsets and
// quadratic matrices with the metric-role signs (output 0 plus, output 1
// minus), plus the linear coefficients (expected near zero) and the largest
// higher-degree coefficient that the quadratic form ignores.
struct ExtractedQuadratic {
    SafetyQuadratic quadratic;
    Vec linear;
    double max_ignored_coeff = 0.0;
};

// Requires input dim 2, no suppressor anywhere, and activations that are
// either identity or fully masked (throws ModelNotPolynomial otherwise).
std::vector<ExtractedQuadratic> extract_quadratics(const PhyTaylorModel& model);

// Exact extremum of the quadratic form u^T P u over a box: the candidates are
// the corners, the per-edge critical points and the interior critical point.
struct BoxExtremum {
    double value = 0.0;
    Vec point;
};

BoxExtremum quad_form_extremum(const Mat& p, const CommandBox& box, bool maximize);

// ok (nullopt) or a witness point where the quadratic goes negative.
std::optional<Vec> verify_nonneg(const SafetyQuadratic& q, const CommandBox& box);

// Minimal automated repair: plus-sign quadratics get their negative
// eigenvalues clipped to a small positive floor (and b raised to zero if
// negative); minus-sign quadratics are scaled down uniformly until the box
// maximum of u^T P u stays below b. Valid inputs are returned unchanged;
// throws Unrevisable for minus-sign with a negative offset.
SafetyQuadratic revise(const SafetyQuadratic& q, const CommandBox& box);

// If both safety metrics respect their bounds the command is returned
// unchanged. Otherwise the two safety equalities s1(u) = min(s1(u0), c1),
// s2(u) = min(s2(u0), c2) are solved in closed form in the eigenbasis of P1;
// among the exact sign candidates, the per-channel closest to the original
// command wins (joint distance breaks disagreements). The result is clamped
// to the box; when clamping breaks the equalities beyond 1e-6 a
// NoRealSolution error is raised instead of returning an unsafe command.
Vec correct_commands(const CorrectionProblem& problem, const Vec& u);

}  // namespace phytaylor
