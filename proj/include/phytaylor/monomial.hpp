#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phytaylor/linalg.hpp"

namespace phytaylor {

// Multi-index of one monomial: exponents[i] is the power of input entry i.
struct ExponentVector {
    std::vector<int> exponents;

    int degree() const {
        int d = 0;
        for (int e : exponents) d += e;
        return d;
    }

    bool operator==(const ExponentVector& other) const { return exponents == other.exponents; }
};

// The augmented monomial set m(x, r): every monomial of total degree <= r over
// n input entries, constant term first. Immutable after construction and safe
// to share across threads.
class MonomialBasis {
public:
    MonomialBasis() = default;  // empty placeholder, replaced by build_basis
    MonomialBasis(int input_dim, int order, std::vector<ExponentVector> terms)
        : input_dim_(input_dim), order_(order), terms_(std::move(terms)) {}

    int input_dim() const { return input_dim_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(terms_.size()); }
    const std::vector<ExponentVector>& terms() const { return terms_; }
    const ExponentVector& term(int k) const { return terms_[static_cast<std::size_t>(k)]; }

    // Guards downstream mask matrices against silent reordering; equal for
    // bases built with equal arguments.
    std::string ordering_id() const;

private:
    int input_dim_ = 0;
    int order_ = 0;
    std::vector<ExponentVector> terms_;
};

// Enumerates the monomial set for `input_dim` variables up to total degree
// `order`. Ordering: constant first, then degree-ascending blocks; within a
// degree pass, entry i multiplies the tail block of the previous pass starting
// at its running index, and blocks are appended in i order.
MonomialBasis build_basis(int input_dim, int order);

// output[k] = prod_i x[i]^{e_k,i}; output[0] is always 1.
Vec evaluate(const MonomialBasis& basis, const Vec& x);

// Entry [k][i] = e_{k,i} * x_i^{e_{k,i}-1} * prod_{j != i} x_j^{e_{k,j}}.
// Row 0 (constant term) is all zeros.
Mat jacobian(const MonomialBasis& basis, const Vec& x);

// Closed-form count: 1 + sum_{s=1}^{r} C(n+s-1, s). Exact integer arithmetic;
// throws OverflowError instead of wrapping.
std::int64_t basis_len(int n, int r);

// Exact binomial C(n, k) with overflow checking.
std::int64_t checked_binomial(std::int64_t n, std::int64_t k);

// len(m(x, r)) minus the summed lengths of a cascade whose per-stage orders
// multiply to r. orders[0] applies to the n-dimensional input; orders[v]
// (v >= 1) applies to intermediate_dims[v-1].
std::int64_t cascade_complexity_difference(int n, int r,
                                           const std::vector<int>& intermediate_dims,
                                           const std::vector<int>& orders);

// Same quantity from the closed form:
// sum_{s=r1+1}^{r} C(n+s-1,s) - sum_{v=1}^{d-1} sum_{s=1}^{r_{v+1}} C(n_v+s-1,s) + 1 - d.
std::int64_t cascade_complexity_closed_form(int n, int r,
                                            const std::vector<int>& intermediate_dims,
                                            const std::vector<int>& orders);

// "x1^2*x3" style rendering; "1" for the constant term.
std::string monomial_to_string(const ExponentVector& term);

}  // namespace phytaylor
