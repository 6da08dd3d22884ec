#include "phytaylor/monomial.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "phytaylor/errors.hpp"

namespace phytaylor {

namespace {

double int_pow(double base, int exp) {
    double acc = 1.0;
    for (int i = 0; i < exp; ++i) acc *= base;
    return acc;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) throw OverflowError("integer count overflow");
    return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("integer count overflow");
    return out;
}

}  // namespace

std::string MonomialBasis::ordering_id() const {
    return "tail-block/v1:n=" + std::to_string(input_dim_) + ",r=" + std::to_string(order_);
}

MonomialBasis build_basis(int input_dim, int order) {
    if (input_dim < 1) throw InvalidArgument("build_basis: input_dim must be >= 1");
    if (order < 1) throw InvalidArgument("build_basis: order must be >= 1");

    const int n = input_dim;
    std::vector<ExponentVector> mono;  // degree >= 1 part, built degree by degree
    mono.reserve(16);
    for (int i = 0; i < n; ++i) {
        ExponentVector e;
        e.exponents.assign(static_cast<std::size_t>(n), 0);
        e.exponents[static_cast<std::size_t>(i)] = 1;
        mono.push_back(std::move(e));
    }

    // tail_start[i]: index in `mono` of the first previous-pass monomial whose
    // leading variable is i; multiplying entry i by that tail yields every new
    // degree-s monomial with leading variable i exactly once.
    std::vector<std::size_t> tail_start(static_cast<std::size_t>(n));
    std::iota(tail_start.begin(), tail_start.end(), 0);

    for (int pass = 2; pass <= order; ++pass) {
        const std::size_t prev_len = mono.size();
        std::vector<std::size_t> next_start(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            next_start[static_cast<std::size_t>(i)] = mono.size();
            for (std::size_t k = tail_start[static_cast<std::size_t>(i)]; k < prev_len; ++k) {
                ExponentVector e = mono[k];
                e.exponents[static_cast<std::size_t>(i)] += 1;
                mono.push_back(std::move(e));
            }
        }
        tail_start = std::move(next_start);
    }

    std::vector<ExponentVector> terms;
    terms.reserve(mono.size() + 1);
    ExponentVector constant;
    constant.exponents.assign(static_cast<std::size_t>(n), 0);
    terms.push_back(std::move(constant));
    for (auto& e : mono) terms.push_back(std::move(e));
    return MonomialBasis(input_dim, order, std::move(terms));
}

Vec evaluate(const MonomialBasis& basis, const Vec& x) {
    if (static_cast<int>(x.size()) != basis.input_dim())
        throw DimensionMismatch("evaluate: input has " + std::to_string(x.size()) +
                                " entries, basis expects " + std::to_string(basis.input_dim()));
    Vec out(static_cast<std::size_t>(basis.size()));
    for (int k = 0; k < basis.size(); ++k) {
        const auto& e = basis.term(k).exponents;
        double acc = 1.0;
        for (std::size_t i = 0; i < e.size(); ++i) acc *= int_pow(x[i], e[i]);
        out[static_cast<std::size_t>(k)] = acc;
    }
    return out;
}

Mat jacobian(const MonomialBasis& basis, const Vec& x) {
    if (static_cast<int>(x.size()) != basis.input_dim())
        throw DimensionMismatch("jacobian: input has " + std::to_string(x.size()) +
                                " entries, basis expects " + std::to_string(basis.input_dim()));
    const int n = basis.input_dim();
    Mat jac(basis.size(), n);
    for (int k = 0; k < basis.size(); ++k) {
        const auto& e = basis.term(k).exponents;
        for (int i = 0; i < n; ++i) {
            const int ei = e[static_cast<std::size_t>(i)];
            if (ei == 0) continue;
            double acc = static_cast<double>(ei) * int_pow(x[static_cast<std::size_t>(i)], ei - 1);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                acc *= int_pow(x[static_cast<std::size_t>(j)], e[static_cast<std::size_t>(j)]);
            }
            jac(k, i) = acc;
        }
    }
    return jac;
}

std::int64_t checked_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t acc = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        // acc * (n - k + i) is divisible by i at every step
        acc = checked_mul(acc, n - k + i) / i;
    }
    return acc;
}

std::int64_t basis_len(int n, int r) {
    if (n < 1) throw InvalidArgument("basis_len: n must be >= 1");
    if (r < 1) throw InvalidArgument("basis_len: r must be >= 1");
    std::int64_t total = 1;
    for (int s = 1; s <= r; ++s) total = checked_add(total, checked_binomial(n + s - 1, s));
    return total;
}

namespace {

void check_cascade_plan(int n, int r, const std::vector<int>& intermediate_dims,
                        const std::vector<int>& orders) {
    if (n < 1 || r < 1) throw InvalidArgument("cascade plan: n and r must be >= 1");
    if (orders.empty()) throw InvalidArgument("cascade plan: at least one order required");
    if (orders.size() != intermediate_dims.size() + 1)
        throw InvalidArgument("cascade plan: need len(orders) == len(intermediate_dims) + 1");
    std::int64_t prod = 1;
    for (int o : orders) {
        if (o < 1) throw InvalidArgument("cascade plan: orders must be >= 1");
        prod = checked_mul(prod, o);
    }
    if (prod != r)
        throw InvalidArgument("cascade plan: product of orders is " + std::to_string(prod) +
                              ", expected " + std::to_string(r));
    for (int d : intermediate_dims)
        if (d < 1) throw InvalidArgument("cascade plan: intermediate dims must be >= 1");
}

}  // namespace

std::int64_t cascade_complexity_difference(int n, int r,
                                           const std::vector<int>& intermediate_dims,
                                           const std::vector<int>& orders) {
    check_cascade_plan(n, r, intermediate_dims, orders);
    std::int64_t cascade_sum = basis_len(n, orders[0]);
    for (std::size_t v = 1; v < orders.size(); ++v)
        cascade_sum = checked_add(cascade_sum, basis_len(intermediate_dims[v - 1], orders[v]));
    return basis_len(n, r) - cascade_sum;
}

std::int64_t cascade_complexity_closed_form(int n, int r,
                                            const std::vector<int>& intermediate_dims,
                                            const std::vector<int>& orders) {
    check_cascade_plan(n, r, intermediate_dims, orders);
    const int d = static_cast<int>(orders.size());
    std::int64_t term1 = 0;
    for (int s = orders[0] + 1; s <= r; ++s)
        term1 = checked_add(term1, checked_binomial(n + s - 1, s));
    std::int64_t term2 = 0;
    for (int v = 1; v < d; ++v) {
        const int nv = intermediate_dims[static_cast<std::size_t>(v - 1)];
        for (int s = 1; s <= orders[static_cast<std::size_t>(v)]; ++s)
            term2 = checked_add(term2, checked_binomial(nv + s - 1, s));
    }
    return term1 - term2 + 1 - d;
}

std::string monomial_to_string(const ExponentVector& term) {
    std::ostringstream out;
    bool first = true;
    for (std::size_t i = 0; i < term.exponents.size(); ++i) {
        const int e = term.exponents[i];
        if (e == 0) continue;
        if (!first) out << "*";
        out << "x" << (i + 1);
        if (e > 1) out << "^" << e;
        first = false;
    }
    if (first) out << "1";
    return out.str();
}

}  // namespace phytaylor
