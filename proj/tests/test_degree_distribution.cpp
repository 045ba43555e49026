#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using cra::DegreeDistribution;
using Catch::Matchers::WithinAbs;

TEST_CASE("construction and normalization") {
    const auto two_copies = DegreeDistribution::from_coeffs({0.0, 0.0, 1.0});
    REQUIRE(two_copies.max_degree() == 2);
    REQUIRE_THAT(two_copies.eval(0.5), WithinAbs(0.25, 1e-15));  // x^2

    const auto single = DegreeDistribution::from_coeffs({0.0, 1.0});
    REQUIRE(single.max_degree() == 1);
    REQUIRE_THAT(single.mean(), WithinAbs(1.0, 1e-15));

    // Near-1 sums are renormalized, clearly-off sums are rejected.
    const auto nudged = DegreeDistribution::from_coeffs({0.0, 0.5 + 1e-10, 0.5});
    double sum = 0.0;
    for (double c : nudged.coeffs()) sum += c;
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));

    REQUIRE_THROWS_AS(DegreeDistribution::from_coeffs({0.0, 1.0, 1.0}), cra::ValidationError);
    REQUIRE_THROWS_AS(DegreeDistribution::from_coeffs({0.0, 0.0}), cra::ValidationError);
    REQUIRE_THROWS_AS(DegreeDistribution::from_coeffs({0.5, -0.5, 1.0}), cra::ValidationError);
    REQUIRE_THROWS_AS(DegreeDistribution::from_coeffs({}), cra::ValidationError);
}

TEST_CASE("mean degree") {
    REQUIRE_THAT(DegreeDistribution::regular(2).mean(), WithinAbs(2.0, 1e-15));
    REQUIRE_THAT(DegreeDistribution::regular(5).mean(), WithinAbs(5.0, 1e-15));
    // hand sum 0.5*1 + 0.5*2
    REQUIRE_THAT(DegreeDistribution::from_coeffs({0.0, 0.5, 0.5}).mean(),
                 WithinAbs(1.5, 1e-15));
}

TEST_CASE("excess distribution") {
    const auto xsq = DegreeDistribution::regular(2).excess();
    REQUIRE(xsq.coeffs() == std::vector<double>{0.0, 1.0});  // x

    const auto constant = DegreeDistribution::regular(1).excess();
    REQUIRE(constant.coeffs() == std::vector<double>{1.0});  // all mass at 0

    const auto mixed = DegreeDistribution::from_coeffs({0.0, 0.5, 0.5}).excess();
    REQUIRE_THAT(mixed.coeffs()[0], WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE_THAT(mixed.coeffs()[1], WithinAbs(2.0 / 3.0, 1e-15));

    REQUIRE_THROWS_AS(DegreeDistribution::regular(0).excess(), cra::ValidationError);
}

TEST_CASE("polynomial derivatives") {
    const auto xsq = DegreeDistribution::regular(2);
    REQUIRE_THAT(xsq.derivative(1, 0.5), WithinAbs(1.0, 1e-15));  // 2x at 0.5
    REQUIRE_THAT(xsq.derivative(0, 1.0), WithinAbs(1.0, 1e-15));

    const auto x5 = DegreeDistribution::regular(5);
    REQUIRE_THAT(x5.derivative(2, 1.0), WithinAbs(20.0, 1e-12));  // 5*4*x^3 at 1

    REQUIRE_THAT(x5.derivative(6, 0.7), WithinAbs(0.0, 0.0));  // beyond the degree
    REQUIRE_THROWS_AS(x5.derivative(0, 1.5), cra::ValidationError);
    REQUIRE_THROWS_AS(x5.derivative(0, -0.1), cra::ValidationError);
}

TEST_CASE("properties on random distributions") {
    std::mt19937_64 rng = cra::make_stream_rng(12345, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto dd = testutil::random_dd(rng);

        // Normalization: evaluation at 1 is exactly 1.
        REQUIRE_THAT(dd.derivative(0, 1.0), WithinAbs(1.0, 1e-12));

        // Mean of the excess distribution equals the second/first derivative
        // ratio at 1, computed here by direct coefficient differentiation.
        if (dd.mean() > 1e-3) {
            double d1 = 0.0, d2 = 0.0;
            const auto& c = dd.coeffs();
            for (std::size_t l = 1; l < c.size(); ++l) d1 += static_cast<double>(l) * c[l];
            for (std::size_t l = 2; l < c.size(); ++l)
                d2 += static_cast<double>(l) * static_cast<double>(l - 1) * c[l];
            REQUIRE_THAT(dd.excess().mean(), WithinAbs(d2 / d1, 1e-12));
        }
    }

    // Monomials close under repeated excess: x^n -> x^(n-2) after two steps.
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto twice = DegreeDistribution::regular(n).excess().excess();
        REQUIRE(twice.max_degree() == n - 2);
        REQUIRE_THAT(twice.coeffs().back(), WithinAbs(1.0, 1e-12));
    }
}
