#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wicknorm/specfun.hpp"

using namespace wicknorm;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

GammaIntegralParams gp(int M, int m, double rho, double x, double y) { return {M, m, rho, x, y}; }

}  // namespace

TEST(LogGamma, KnownValues) {
    EXPECT_EQ(log_gamma(1.0), 0.0);
    EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
    EXPECT_LT(rel(log_gamma(11.0), std::log(3628800.0)), 1e-14);
}

// Reference values from 40-digit arithmetic.
TEST(LogGamma, RelativeAccuracyOverRange) {
    const std::pair<double, double> ref[] = {
        {1e-6, 13.81550998074943166920783},        {0.1, 2.252712651734205959869702},
        {2.5, 0.2846828704729191596324947},        {100.0, 359.134205369575398776044},
        {1e6, 12815504.56914761165997697},         {123456.789, 1323902.018795063123806101},
    };
    for (auto [x, v] : ref) EXPECT_LT(rel(log_gamma(x), v), 1e-13) << x;
}

TEST(LogGamma, RejectsNonPositive) {
    EXPECT_THROW(log_gamma(0.0), DomainError);
    EXPECT_THROW(log_gamma(-1.5), DomainError);
}

TEST(Beta, Examples) {
    EXPECT_NEAR(beta(1, 1), 1.0, 1e-15);
    EXPECT_LT(rel(beta(0.5, 0.5), std::numbers::pi), 1e-14);
    EXPECT_LT(rel(beta(2, 3), 1.0 / 12), 1e-14);
    EXPECT_THROW(beta(0, 1), DomainError);
    EXPECT_THROW(beta(1, -2), DomainError);
}

TEST(SphereArea, LowDimensions) {
    EXPECT_LT(rel(sphere_area(1), 2.0), 1e-15);
    EXPECT_LT(rel(sphere_area(2), 2 * std::numbers::pi), 1e-14);
    EXPECT_LT(rel(sphere_area(3), 4 * std::numbers::pi), 1e-14);
    EXPECT_LT(rel(sphere_area(4), 2 * std::numbers::pi * std::numbers::pi), 1e-14);
    EXPECT_THROW(sphere_area(0), DomainError);
}

TEST(SimplexGammaIntegral, ClosedFormExamples) {
    EXPECT_LT(rel(simplex_gamma_integral(gp(2, 0, 1, 1, 0)), 0.5), 1e-14);
    EXPECT_LT(rel(simplex_gamma_integral(gp(2, 1, 1, 1, 1)), 1.0 / 3), 1e-14);
    EXPECT_LT(rel(simplex_gamma_integral(gp(1, 1, 1, 0.5, 0)), 2.0), 1e-14);
    EXPECT_LT(rel(simplex_gamma_integral(gp(3, 0, 2, 1, 0)), 8.0 / 6), 1e-14);
}

// Nested adaptive quadrature of the defining integral, 40 digits.
TEST(SimplexGammaIntegral, MatchesQuadrature) {
    EXPECT_LT(rel(simplex_gamma_integral(gp(2, 1, 1.5, 0.7, 1.3)), 2.657465466073097586727436), 1e-13);
}

TEST(SimplexGammaIntegral, LargeDimensionSmallExponentStaysFinite) {
    EXPECT_LT(rel(log_simplex_gamma_integral(gp(10000, 0, 1, 1e-5, 0)), 115129.2468013995169139325), 1e-13);
    EXPECT_LT(rel(log_simplex_gamma_integral(gp(10000, 5000, 0.5, 1e-5, 2.5)), 115127.3652181981840560218), 1e-13);
}

TEST(SimplexGammaIntegral, DomainErrors) {
    EXPECT_THROW(simplex_gamma_integral(gp(0, 0, 1, 1, 0)), DomainError);
    EXPECT_THROW(simplex_gamma_integral(gp(2, 3, 1, 1, 0)), DomainError);
    EXPECT_THROW(simplex_gamma_integral(gp(2, 1, 0, 1, 0)), DomainError);
    EXPECT_THROW(simplex_gamma_integral(gp(2, 1, 1, 0, 0)), DomainError);
    EXPECT_THROW(simplex_gamma_integral(gp(2, 1, 1, 1, -0.5)), DomainError);
}

TEST(SimplexGammaIntegral, ScalingLaw) {
    for (double rho : {0.3, 0.5, 1.7, 2.0})
        for (auto base : {gp(3, 1, 1, 0.4, 2.2), gp(5, 5, 1, 1.3, 0.0), gp(2, 0, 1, 2.5, 0)}) {
            auto scaled = base;
            scaled.rho = rho;
            const double expect = std::pow(rho, base.M * base.x + base.y) * simplex_gamma_integral(base);
            EXPECT_LT(rel(simplex_gamma_integral(scaled), expect), 1e-12);
        }
}

TEST(SimplexGammaIntegral, SpecialCases) {
    for (int M : {1, 2, 4, 7})
        for (double x : {0.2, 1.0, 2.7})
            for (double y : {0.0, 0.5, 3.0}) {
                const double full = std::exp(M * std::lgamma(x) + std::lgamma(y + 1) - std::lgamma(M * x + y + 1));
                EXPECT_LT(rel(simplex_gamma_integral(gp(M, M, 1, x, y)), full), 1e-12);
            }
    for (int M : {1, 3, 6})
        for (double x : {0.1, 1.5}) {
            const double none = std::exp(M * std::lgamma(x) - std::lgamma(M * x + 1));
            EXPECT_LT(rel(simplex_gamma_integral(gp(M, 0, 1, x, 0)), none), 1e-12);
        }
}

TEST(SimplexGammaIntegral, IncreasingInRho) {
    double prev = 0;
    for (double rho = 0.1; rho <= 3.0; rho += 0.1) {
        const double v = simplex_gamma_integral(gp(3, 2, rho, 0.6, 1.1));
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(SimplexGammaIntegralMc, AgreesWithClosedForm) {
    for (auto p : {gp(2, 0, 1, 1, 0), gp(2, 1, 1, 1, 1)}) {
        const McEstimate e = simplex_gamma_integral_mc(p, 1000000, 9);
        EXPECT_LT(std::abs(e.value - simplex_gamma_integral(p)), 4 * e.std_error);
        EXPECT_GT(e.std_error, 0);
    }
}

TEST(SimplexGammaIntegralMc, SmallExponentAndResidual) {
    const auto p = gp(3, 2, 0.8, 0.15, 2.0);
    const McEstimate e = simplex_gamma_integral_mc(p, 400000, 5);
    EXPECT_LT(std::abs(e.value - simplex_gamma_integral(p)), 4 * e.std_error);
}

TEST(SimplexGammaIntegralMc, DeterministicAcrossRunsAndThreads) {
    const auto p = gp(4, 2, 1.3, 0.8, 1.5);
    const McEstimate a = simplex_gamma_integral_mc(p, 100000, 77, 1);
    const McEstimate b = simplex_gamma_integral_mc(p, 100000, 77, 1);
    const McEstimate c = simplex_gamma_integral_mc(p, 100000, 77, 4);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.value, c.value);
    EXPECT_NE(a.value, simplex_gamma_integral_mc(p, 100000, 78, 1).value);
}

TEST(SimplexGammaIntegralMc, Limits) {
    EXPECT_THROW(simplex_gamma_integral_mc(gp(13, 0, 1, 1, 0), 10000, 1), UnsupportedScale);
    EXPECT_THROW(simplex_gamma_integral_mc(gp(2, 0, 1, 1, 0), 999, 1), PreconditionError);
}

TEST(RecursionCheck, Examples) {
    auto [l1, r1] = recursion_check(gp(2, 1, 1, 1, 1));
    EXPECT_LT(rel(l1, 1.0 / 3), 1e-14);
    EXPECT_LT(rel(r1, 1.0 / 3), 1e-14);
    auto [l2, r2] = recursion_check(gp(3, 2, 1, 0.5, 0));
    EXPECT_LT(rel(l2, r2), 1e-12);
    auto [l3, r3] = recursion_check(gp(2, 1, 1, 1, 0));
    EXPECT_LT(rel(l3, 0.5), 1e-14);
    EXPECT_LT(rel(r3, 0.5), 1e-14);
}

TEST(RecursionCheck, Preconditions) {
    EXPECT_THROW(recursion_check(gp(3, 0, 1, 1, 0)), PreconditionError);
    EXPECT_THROW(recursion_check(gp(1, 1, 1, 1, 0)), PreconditionError);
}
