#include <gtest/gtest.h>

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "wicknorm/counterexamples.hpp"
#include "wicknorm/norms.hpp"

using namespace wicknorm;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

KernelComponent monomial(int m, int n, double c, double ac, double aa, SupportConstraint s, int d) {
    KernelComponent k;
    k.m = m;
    k.n = n;
    k.log_coeff = std::log(c);
    k.creation.alpha = ac;
    k.annihilation.alpha = aa;
    k.constraint = s;
    k.dimension = d;
    return k;
}

// Plain uniform sampling of the radial integral over [0, 1]^{m+n}.
std::pair<double, double> brute_force_norm_p(const KernelComponent& k, const NormParams& np, int samples,
                                             unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double vol = std::pow(sphere_area(np.d), k.m + k.n);
    double s = 0, s2 = 0;
    std::vector<double> c(k.m), a(k.n);
    for (int i = 0; i < samples; ++i) {
        double jac = 1;
        for (auto& r : c) jac *= std::pow(r = u(rng), np.d - 1 - np.lambda);
        for (auto& r : a) jac *= std::pow(r = u(rng), np.d - 1 - np.lambda);
        const double f = std::pow(std::abs(evaluate_kernel(k, c, a)), np.p) * jac * vol;
        s += f;
        s2 += f * f;
    }
    const double mean = s / samples;
    return {mean, std::sqrt((s2 / samples - mean * mean) / samples)};
}

}  // namespace

TEST(ComponentNorm, EpsFamilyClosedForm) {
    const NormParams np{3.5, 2.0, 3, 1.0};
    for (double eps : {0.5, 0.01})
        for (int m : {1, 3, 10}) {
            KernelComponent k = eps_unit_component(m, eps, np);
            k.log_coeff = std::log(0.37);
            const double expect = 0.37 * std::pow(0.5, m * eps / 2) *
                                  std::pow(std::pow(4 * std::numbers::pi * std::tgamma(eps), m) / std::tgamma(m * eps + 1),
                                           0.5);
            const NormResult r = component_norm(k, np);
            EXPECT_EQ(r.method, NormMethod::ClosedForm);
            EXPECT_LT(rel(r.value(), expect), 1e-12) << eps << " " << m;
        }
}

TEST(ComponentNorm, UnitSimplexExample) {
    const NormParams np{0.5, 2.0, 1, 2.0};  // lambda chosen so that alpha = (lambda - d + eps)/p = 0
    const KernelComponent k = eps_unit_component(1, 0.5, np);
    EXPECT_LT(rel(component_norm(k, np).value(), 2.0), 1e-14);
}

TEST(ComponentNorm, SupFamily) {
    const NormParams np{1.0, inf, 1, 1.0};
    const auto D = WeightFunction::constant();
    const InfFamily f = build_inf_family(np, D);
    for (int n : {1, 2, 7, 50}) {
        const NormResult r = component_norm(*f.w.component(0, n), np);
        EXPECT_LT(rel(r.value(), 1.0 / (n * n)), 1e-13);
    }
}

TEST(ComponentNorm, DivergentExponent) {
    const NormParams np{3.5, 2.0, 3, 1.0};
    const auto k = monomial(0, 2, 1.0, 0, 0, SimplexJoint{0.5, SimplexScope::Annihilation}, 3);
    const NormResult r = component_norm(k, np);
    EXPECT_TRUE(r.infinite);
    EXPECT_EQ(r.value(), inf);
    EXPECT_NE(r.divergent_reason.find("p*alpha - lambda + d <= 0"), std::string::npos);
}

TEST(ComponentNorm, BoxFactorizes) {
    const NormParams np{1.0, 2.0, 1, 1.0};
    const auto k = monomial(2, 1, 3.0, 0.5, 1.5, BoxPerCoordinate{0.25}, 1);
    // per coordinate: O * integral_0^b r^{p alpha - lambda + d - 1} dr
    auto one = [&](double a) {
        const double x = 2 * a - 1 + 1;
        return 2.0 * std::pow(0.25, x) / x;
    };
    const double expect = 3.0 * std::sqrt(one(0.5) * one(0.5) * one(1.5));
    EXPECT_LT(rel(component_norm(k, np).value(), expect), 1e-13);
}

TEST(ComponentNorm, ClosedFormAgreesWithSampling) {
    const NormParams np{1.0, 2.0, 2, 1.0};
    const KernelComponent cases[] = {
        monomial(1, 1, 1.3, 1.0, 0.8, SimplexJoint{0.9, SimplexScope::Joint}, 2),
        monomial(2, 1, 0.7, 0.6, 1.2, SimplexJoint{0.8, SimplexScope::Creation}, 2),
        monomial(1, 2, 2.0, 0.9, 0.5, SimplexJoint{0.7, SimplexScope::Each}, 2),
        monomial(2, 2, 1.0, 0.5, 0.5, SimplexJoint{1.0, SimplexScope::Annihilation}, 2),
        monomial(0, 3, 1.0, 0.0, 0.7, BoxPerCoordinate{0.6}, 2),
    };
    unsigned seed = 11;
    for (const auto& k : cases) {
        const double closed = std::pow(component_norm(k, np).value(), np.p);
        auto [mean, se] = brute_force_norm_p(k, np, 1000000, seed++);
        EXPECT_LT(std::abs(mean - closed), 4 * se) << k.m << "," << k.n;
    }
}

TEST(ComponentNorm, Homogeneous) {
    const NormParams np{1.0, 2.0, 1, 1.0};
    auto k = monomial(1, 2, 1.0, 0.7, 0.9, SimplexJoint{0.8}, 1);
    const double base = component_norm(k, np).value();
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
        k.log_coeff = std::log(c);
        EXPECT_LT(rel(component_norm(k, np).value(), c * base), 1e-13);
    }
}

TEST(ComponentNorm, SingularProfileMonteCarlo) {
    const NormParams np{0.75, 1.5, 1, 1.0};
    const PLt2Family f = build_p_lt2_family(1.5, np);
    KernelComponent k = f.w;
    k.n = 0;
    k.constraint = SimplexJoint{1.0, SimplexScope::Creation};
    // 2 * integral_0^1 |1/2 - r|^{-6/7} dr = 28 * 2^{-1/7}
    const double expect = std::pow(28 * std::pow(2.0, -1.0 / 7), 1 / 1.5);
    McOptions mc;
    mc.samples = 400000;
    const NormResult r = component_norm(k, np, mc);
    ASSERT_EQ(r.method, NormMethod::MonteCarlo);
    EXPECT_LT(std::abs(r.value() - expect), 4 * r.std_error());
    EXPECT_NEAR(expect, 8.63182242689584394718968219377, 1e-12);
}

TEST(ComponentNorm, NonIntegrableSingularity) {
    const NormParams np{0.0, 2.0, 1, 1.0};
    auto k = monomial(1, 0, 1.0, 0, 0, SimplexJoint{1.0}, 1);
    k.creation = {0.0, 0.5, 0.5};
    const NormResult r = component_norm(k, np);
    EXPECT_TRUE(r.infinite);
    EXPECT_NE(r.divergent_reason.find("p*beta >= 1"), std::string::npos);
}

TEST(ComponentNorm, Preconditions) {
    const auto k = monomial(1, 0, 1.0, 1, 0, SimplexJoint{1.0}, 2);
    EXPECT_THROW(component_norm(k, NormParams{0, 2, 1, 1}), PreconditionError);
    EXPECT_THROW(component_norm(k, NormParams{0, 0.5, 2, 1}), DomainError);
}

TEST(SupSearch, NeverExceedsAnalyticAndReachesCorner) {
    const NormParams np{1.0, inf, 1, 1.0};
    const InfFamily f = build_inf_family(np, WeightFunction::constant());
    for (int n : {1, 2, 3}) {
        const auto k = *f.w.component(0, n);
        const double analytic = component_norm(k, np).value();
        const double found = sup_search_norm(k, np, 10000).value();
        EXPECT_LE(found, analytic * (1 + 1e-12));
        EXPECT_LT(rel(found, analytic), 1e-6);
    }
    // alpha > lambda: supremum sits at the corner of the simplex
    const auto k = monomial(0, 2, 1.0, 0, 2.0, SimplexJoint{0.5, SimplexScope::Annihilation}, 1);
    const double analytic = component_norm(k, np).value();
    EXPECT_LT(rel(analytic, 0.25 * 0.25), 1e-13);
    EXPECT_LT(rel(sup_search_norm(k, np, 10000).value(), analytic), 1e-6);
}

TEST(NormalizedCoefficient, Examples) {
    const NormParams np{0.5, 2.0, 1, 2.0};
    const auto D = WeightFunction::constant();
    EXPECT_LT(rel(normalized_counterexample_coefficient(1, 0.5, np, D, 1.25), 0.5), 1e-14);
    const NormParams np3{3.5, 2.0, 3, 1.0};
    const auto G = WeightFunction::geometric(0.5);
    for (int m : {1, 2, 9, 100}) {
        KernelComponent k = eps_unit_component(m, 0.01, np3);
        k.log_coeff = log_normalized_counterexample_coefficient(m, 0.01, np3, G, 1.25);
        EXPECT_LT(rel(G.value(m) * component_norm(k, np3).value(), std::pow(m, -1.25)), 1e-12);
    }
}

TEST(NormalizedCoefficient, Errors) {
    const NormParams np{3.5, 2.0, 3, 1.0};
    const auto D = WeightFunction::constant();
    EXPECT_THROW(normalized_counterexample_coefficient(1, 0.1, np, D, 1.5), DomainError);
    EXPECT_THROW(normalized_counterexample_coefficient(1, 0.1, np, D, 1.0), DomainError);
    EXPECT_THROW(normalized_counterexample_coefficient(1, 0.0, np, D, 1.2), DomainError);
    EXPECT_THROW(normalized_counterexample_coefficient(0, 0.1, np, D, 1.2), DomainError);
}

TEST(SequenceNorm, SupFamilyApproachesPiSquaredOverSix) {
    const NormParams np{1.0, inf, 1, 1.0};
    const InfFamily f = build_inf_family(np, WeightFunction::constant());
    const double limit = std::numbers::pi * std::numbers::pi / 6;
    double prev = 0;
    for (int K : {10, 100, 1000, 10000}) {
        const SequenceNorm s = sequence_norm(f.w, WeightFunction::constant(), np, K);
        EXPECT_TRUE(s.certified_finite);
        EXPECT_GT(s.partial, prev);
        EXPECT_LE(s.partial, limit);
        EXPECT_LE(limit, s.partial + s.tail_bound);
        prev = s.partial;
    }
}

TEST(SequenceNorm, EpsFamilyApproachesZeta) {
    EpsConfig cfg;
    const EpsFamily f = build_eps_family(0.1, cfg);
    const double z = boost::math::zeta(1.25);
    EXPECT_NEAR(z, 4.5951118258429434, 1e-12);
    const SequenceNorm s = sequence_norm(f.w, cfg.D, cfg.params(), 2000);
    EXPECT_TRUE(s.certified_finite);
    EXPECT_LT(rel(s.partial, zeta_partial(2000, 1.25)), 1e-12);
    EXPECT_LE(s.partial, z);
    EXPECT_LE(z, s.partial + s.tail_bound);
    const SequenceNorm sv = sequence_norm(f.v, cfg.D, cfg.params(), 2000);
    EXPECT_LT(rel(sv.partial, s.partial), 1e-13);
}

TEST(SequenceNorm, EpsIndependent) {
    EpsConfig cfg;
    const double ref = sequence_norm(build_eps_family(0.5, cfg).w, cfg.D, cfg.params(), 500).partial;
    for (double eps : {1.0 / 8, 1.0 / 64, 1.0 / 512})
        EXPECT_LT(rel(sequence_norm(build_eps_family(eps, cfg).w, cfg.D, cfg.params(), 500).partial, ref), 1e-12);
}

TEST(SequenceNorm, EmptyAndInfinite) {
    const NormParams np{1.0, 2.0, 1, 1.0};
    const SequenceNorm e = sequence_norm(KernelSequence{}, WeightFunction::constant(), np, 0);
    EXPECT_EQ(e.partial, 0.0);
    EXPECT_TRUE(e.certified_finite);
    KernelSequence s;
    s.insert(monomial(0, 1, 1.0, 0.0, -0.5, SimplexJoint{1.0}, 1));
    const SequenceNorm r = sequence_norm(s, WeightFunction::constant(), np, 1);
    EXPECT_TRUE(r.infinite);
    EXPECT_EQ(r.partial, inf);
    EXPECT_THROW(sequence_norm(s, WeightFunction::constant(), np, 0), PreconditionError);
}

TEST(ZetaHelpers, TailBoundsTheRemainder) {
    for (double kappa : {1.1, 1.25, 2.0}) {
        const double z = boost::math::zeta(kappa);
        for (int K : {10, 1000}) {
            const double rem = z - zeta_partial(K, kappa);
            EXPECT_GT(rem, 0);
            EXPECT_LE(rem, zeta_tail_bound(K, kappa));
        }
    }
    EXPECT_EQ(zeta_tail_bound(10, 1.0), inf);
}
