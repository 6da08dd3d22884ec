#include <doctest.h>

#include <cmath>

#include "phytaylor/errors.hpp"
#include "phytaylor/rng.hpp"
#include "phytaylor/suppressor.hpp"

using namespace phytaylor;

namespace {

// Parameters that keep the suppressed ratio in (-inf, -1]: kappa > 0 forces a
// negative rho at least (h + w) * kappa in magnitude, kappa < 0 the mirrored
// positive one. Both satisfy |rho| >= |h + w| * |kappa|.
//
// All values live on a dyadic grid with few significant bits, so every
// product and sum below is exact in double precision and the reconstruction
// identity can be asserted bit-for-bit.
struct ValidSample {
    double truth;
    double noise;
    double kappa;
    double rho;
};

double dyadic(Rng& rng, double lo, double hi) {
    const int grid = 1 << 18;
    const int klo = static_cast<int>(lo * grid);
    const int khi = static_cast<int>(hi * grid);
    return std::ldexp(static_cast<double>(rng.uniform_int(klo, khi)), -18);
}

ValidSample draw_valid(Rng& rng) {
    ValidSample s;
    s.truth = dyadic(rng, -3.0, 3.0);
    s.noise = dyadic(rng, -3.0, 3.0);
    const double mag = dyadic(rng, 0.25, 2.0);
    s.kappa = rng.uniform01() < 0.5 ? mag : -mag;
    const double needed = std::abs(s.truth + s.noise) + dyadic(rng, 0.0, 2.0);
    s.rho = s.kappa > 0.0 ? -needed * s.kappa : needed * -s.kappa;
    return s;
}

}  // namespace

TEST_CASE("deployed suppressor mapping") {
    SuppressorChannel plain{true, 1.0, 0.0, false};
    CHECK(suppress(-0.5, plain) == 0.0);
    CHECK(suppress(0.7, plain) == 0.7);

    SuppressorChannel affine{true, -1.0, 90.0, true};
    CHECK(suppress(0.7, affine) == doctest::Approx(89.3));
    CHECK(suppress(-0.2, affine) == 0.0);

    SuppressorChannel inactive{};
    CHECK(suppress(-0.5, inactive) == -0.5);
}

TEST_CASE("explicit noise-sign mapping") {
    SuppressorChannel ch{true, -1.0, 90.0, false};
    CHECK(suppress(0.7, ch, NoiseSign::negative) == 0.7);
    CHECK(suppress(0.7, ch, NoiseSign::positive) == doctest::Approx(89.3));
    CHECK(suppress(-0.5, ch, NoiseSign::positive) == 0.0);
}

TEST_CASE("suppress derivative matches the branch structure") {
    SuppressorChannel affine{true, -1.0, 90.0, true};
    CHECK(suppress_derivative(-1.0, affine) == 0.0);
    CHECK(suppress_derivative(2.0, affine) == -1.0);
    SuppressorChannel plain{true, 1.0, 0.0, false};
    CHECK(suppress_derivative(2.0, plain) == 1.0);
    SuppressorChannel off{};
    CHECK(suppress_derivative(-5.0, off) == 1.0);
}

TEST_CASE("composed monomial DNR magnitude") {
    CHECK(dnr_of_monomial(1.0, 1.0, 1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(dnr_of_monomial(1e12, 1.0, 1, 0) == doctest::Approx(1e12).epsilon(1e-3));
    CHECK(dnr_of_monomial(-2.0, -2.0, 1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(dnr_of_monomial(-0.5, 1.0, 2, 0), SingularDnr);
    CHECK_THROWS_AS(dnr_of_monomial(0.0, 1.0, 1, 0), InvalidArgument);
    CHECK_THROWS_AS(dnr_of_monomial(1.0, 1.0, 0, 0), InvalidArgument);
}

TEST_CASE("DnrSample ratio") {
    const DnrSample sample{3.0, 1.5};
    CHECK(sample.dnr() == 2.0);
    const DnrSample noiseless{1.0, 0.0};
    CHECK_THROWS_AS(noiseless.dnr(), SingularDnr);
}

TEST_CASE("suppressed decomposition on the worked cases") {
    auto [h1, w1] = suppressed_decomposition(1.0, -0.5, 1.0, 1.0);
    CHECK(h1 == 1.0);
    CHECK(w1 == -0.5);

    auto [h2, w2] = suppressed_decomposition(1.0, -2.0, 1.0, 2.0);
    CHECK(h2 == 1.0);
    CHECK(w2 == -1.0);

    auto [h3, w3] = suppressed_decomposition(1.0, 0.5, -1.0, 90.0);
    CHECK(h3 == 89.0);
    CHECK(w3 == -0.5);

    CHECK_THROWS_AS(suppressed_decomposition(1.0, 0.5, -1.0, 0.1), ConditionViolated);
}

TEST_CASE("reconstruction identity holds exactly on 1000 valid samples") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const ValidSample s = draw_valid(rng);
        auto [truth_out, noise_out] = suppressed_decomposition(s.truth, s.noise, s.kappa, s.rho);
        SuppressorChannel ch{true, s.kappa, s.rho, false};
        const double output =
            suppress(s.truth + s.noise, ch, s.noise > 0.0 ? NoiseSign::positive : NoiseSign::negative);
        CHECK(truth_out + noise_out == output);  // bit-exact by construction
    }
}

TEST_CASE("post-suppression ratio stays in (-inf, -1]") {
    Rng rng(4);
    int checked = 0;
    for (int i = 0; i < 2000 && checked < 1000; ++i) {
        const ValidSample s = draw_valid(rng);
        auto [truth_out, noise_out] = suppressed_decomposition(s.truth, s.noise, s.kappa, s.rho);
        if (noise_out == 0.0) continue;
        const double ratio = truth_out / noise_out;
        CHECK(ratio <= -1.0 + 1e-9);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("monotonicity of the composed DNR within each sign region") {
    Rng rng(5);
    struct Region {
        double lo_mag;
        double hi_mag;
        double sign;
    };
    const Region regions[] = {
        {1.0, 40.0, -1.0},   // (-inf, -1]
        {0.05, 0.49, -1.0},  // [-1/2, 0)
        {0.05, 40.0, 1.0},   // (0, inf)
    };
    for (const Region& region : regions) {
        for (int i = 0; i < 500; ++i) {
            const double a = rng.uniform(region.lo_mag, region.hi_mag - 0.01);
            const double b = rng.uniform(a + 0.005, region.hi_mag);
            const double other = rng.uniform(region.lo_mag, region.hi_mag);
            const int p = rng.uniform_int(1, 3);
            const int q = rng.uniform_int(1, 3);
            // Raise |dnr_i| with dnr_j held fixed, then the mirrored check.
            const double low_i = dnr_of_monomial(region.sign * a, region.sign * other, p, q);
            const double high_i = dnr_of_monomial(region.sign * b, region.sign * other, p, q);
            CHECK(high_i > low_i);
            const double low_j = dnr_of_monomial(region.sign * other, region.sign * a, p, q);
            const double high_j = dnr_of_monomial(region.sign * other, region.sign * b, p, q);
            CHECK(high_j > low_j);
        }
    }
}

TEST_CASE("channel condition against a declared input bound") {
    SuppressorChannel ch{true, -1.0, 90.0, true};
    CHECK(channel_condition_holds(ch, 89.0));
    CHECK_FALSE(channel_condition_holds(ch, 91.0));
    CHECK(channel_condition_holds(SuppressorChannel{}, 1e12));
}
