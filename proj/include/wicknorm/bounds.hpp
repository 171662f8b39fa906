#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"
#include "kernels.hpp"
#include "mc.hpp"
#include "norms.hpp"
#include "wick.hpp"

namespace wicknorm {

struct BoundCertificate {
    std::string label;
    double lhs = 0;
    double lhs_std_error = 0;
    double rhs = 0;
    double margin = 0;  // (rhs - lhs)/sigma when sigma > 0, else rhs - lhs
    bool holds = false;
    bool structural_ok = true;

    void settle(double slack_sigmas = 4.0) {
        margin = lhs_std_error > 0 ? (rhs - lhs) / lhs_std_error : rhs - lhs;
        holds = structural_ok && lhs <= rhs + slack_sigmas * lhs_std_error;
    }
};

inline NormParams product_bound_params(double mu, double rho, int d = 3) {
    if (!(mu > 0)) throw DomainError("componentwise bound: mu must be positive");
    return {3 + 2 * mu, 2.0, d, rho};
}

namespace detail {

inline int family_dimension(const KernelSequence& w, const KernelSequence& v, int fallback) {
    for (const auto* s : {&w, &v})
        if (!s->explicit_components().empty()) return s->explicit_components().begin()->second.dimension;
    return fallback;
}

inline SequenceNorm finite_norm(const KernelSequence& s, const WeightFunction& D, const NormParams& np,
                                const McOptions& mc) {
    if (!s.finite()) throw UnsupportedFamily("bound check: finitely supported sequences required");
    const SequenceNorm r = sequence_norm(s, D, np, std::max(s.max_index(), 0), mc);
    if (r.infinite) throw UnsupportedFamily("bound check: input norm is infinite (" + r.reason + ")");
    return r;
}

}  // namespace detail

// ||(w *_rho v)_{M,N}||_{3+2mu,2} <= (2 xi)^{M+N} rho^{2+2mu} e^{4 xi^2} ||w||^D ||v||^D, D = Geometric(xi).
inline BoundCertificate componentwise_bound_check(const KernelSequence& w, const KernelSequence& v, int M, int N,
                                                  double mu, double xi, double rho, const McOptions& mc = {}) {
    const NormParams np = product_bound_params(mu, rho, detail::family_dimension(w, v, 3));
    const WeightFunction D = WeightFunction::geometric(xi);
    BoundCertificate c;
    c.label = "(" + std::to_string(M) + "," + std::to_string(N) + ")";
    const SequenceNorm nw = detail::finite_norm(w, D, np, mc), nv = detail::finite_norm(v, D, np, mc);
    c.rhs = std::pow(2 * xi, M + N) * std::pow(rho, 2 + 2 * mu) * std::exp(4 * xi * xi) * nw.partial * nv.partial;
    const McEstimate lhs = product_component_norm(WickProduct(w, v, M, N, np), np, mc);
    c.lhs = lhs.value;
    c.lhs_std_error = lhs.std_error;
    c.settle();
    return c;
}

// Lemma: for annihilation-only w and creation-only v, ||w *_rho v||^D <= e ||w||^D ||v||^D with D = Factorial.
inline BoundCertificate factorial_submult_check(const KernelSequence& w, const KernelSequence& v, const NormParams& np,
                                                const McOptions& mc = {}) {
    if (!(np.p == 2)) throw PreconditionError("factorial bound: p must be 2");
    if (!(np.lambda >= 1)) throw PreconditionError("factorial bound: lambda must be at least 1");
    if (!w.annihilation_only()) throw PreconditionError("factorial bound: w must be annihilation-only");
    if (!v.creation_only()) throw PreconditionError("factorial bound: v must be creation-only");
    np.validate_cutoff();
    const WeightFunction D = WeightFunction::factorial();
    BoundCertificate c;
    c.label = "factorial";
    const SequenceNorm nw = detail::finite_norm(w, D, np, mc), nv = detail::finite_norm(v, D, np, mc);
    c.rhs = std::exp(1.0) * nw.partial * nv.partial;
    const int K = std::max(w.max_index(), v.max_index());
    NeumaierSum sum;
    double var = 0;
    int stream = 0;
    for (int M = 0; M <= K; ++M)
        for (int N = 0; N <= K; ++N) {
            const WickProduct prod(w, v, M, N, np);
            if (!prod.collapsed()) c.structural_ok = false;
            if (prod.terms().empty()) continue;
            McOptions o = mc;
            o.seed = stream_seed(mc.seed, std::uint64_t(stream++));
            const McEstimate e = product_component_norm(prod, np, o);
            const double wt = D.value(M) * D.value(N);
            sum.add(wt * e.value);
            var += std::pow(wt * e.std_error, 2);
        }
    c.lhs = sum.value();
    c.lhs_std_error = std::sqrt(var);
    c.settle();
    return c;
}

struct MaximalIndexCertificate {
    BoundCertificate total;
    std::vector<BoundCertificate> components;
    double multiplier = 0;  // 2^{4K}
    bool structural_ok = true;
    bool all_components_hold() const {
        for (const auto& c : components)
            if (!c.holds) return false;
        return true;
    }
};

inline double maximal_index_multiplier(int K) { return std::ldexp(1.0, 4 * K); }

// Sequences vanishing above index K: the product vanishes above 2K, and
// ||w * v||^D <= 2^{4K} rho^{2+2mu} e^{4 xi^2} ||w||^D ||v||^D.
inline MaximalIndexCertificate maximal_index_bound(const KernelSequence& w, const KernelSequence& v, double mu,
                                                   double xi, double rho, const McOptions& mc = {}) {
    const NormParams np = product_bound_params(mu, rho, detail::family_dimension(w, v, 3));
    const WeightFunction D = WeightFunction::geometric(xi);
    const int K = std::max(w.max_index(), v.max_index());
    MaximalIndexCertificate out;
    out.multiplier = maximal_index_multiplier(K);
    for (int M = 0; M <= 2 * K + 2; ++M)
        for (int N = 0; N <= 2 * K + 2; ++N)
            if ((M > 2 * K || N > 2 * K) && !WickProduct(w, v, M, N, np).terms().empty()) out.structural_ok = false;
    NeumaierSum sum;
    double var = 0;
    int stream = 0;
    for (int M = 0; M <= 2 * K; ++M)
        for (int N = 0; N <= 2 * K; ++N) {
            if (WickProduct(w, v, M, N, np).terms().empty()) continue;
            McOptions o = mc;
            o.seed = stream_seed(mc.seed, std::uint64_t(stream++));
            BoundCertificate c = componentwise_bound_check(w, v, M, N, mu, xi, rho, o);
            const double wt = D.value(M) * D.value(N);
            sum.add(wt * c.lhs);
            var += std::pow(wt * c.lhs_std_error, 2);
            out.components.push_back(std::move(c));
        }
    const SequenceNorm nw = detail::finite_norm(w, D, np, mc), nv = detail::finite_norm(v, D, np, mc);
    out.total.label = "total";
    out.total.lhs = sum.value();
    out.total.lhs_std_error = std::sqrt(var);
    out.total.rhs = out.multiplier * std::pow(rho, 2 + 2 * mu) * std::exp(4 * xi * xi) * nw.partial * nv.partial;
    out.total.structural_ok = out.structural_ok;
    out.total.settle();
    return out;
}

// ---------------------------------------------------------------------------
// Random finitely supported families with closed-form component norms.

enum class FamilyShape { General, AnnihilationOnly, CreationOnly };

struct RandomFamilyOptions {
    int max_index = 3;
    int max_components = 4;
    FamilyShape shape = FamilyShape::General;
    NormParams np{4.0, 2.0, 3, 1.0};
    double min_exponent = 1.0;  // p alpha - lambda + d drawn from [min_exponent, max_exponent]
    double max_exponent = 3.0;
};

inline KernelComponent random_component(Rng& rng, int m, int n, const RandomFamilyOptions& o) {
    KernelComponent c;
    c.m = m;
    c.n = n;
    c.dimension = o.np.d;
    c.log_coeff = rng.uniform(std::log(0.1), std::log(10.0));
    auto alpha = [&] { return (rng.uniform(o.min_exponent, o.max_exponent) + o.np.lambda - o.np.d) / o.np.p; };
    c.creation.alpha = alpha();
    c.annihilation.alpha = alpha();
    static constexpr SimplexScope scopes[] = {SimplexScope::Creation, SimplexScope::Annihilation, SimplexScope::Joint,
                                              SimplexScope::Each};
    c.constraint = SimplexJoint{rng.uniform(0.3, 1.0), scopes[rng.below(4)]};
    return c;
}

inline KernelSequence random_family(Rng& rng, const RandomFamilyOptions& o) {
    std::vector<std::pair<int, int>> slots;
    for (int m = 0; m <= o.max_index; ++m)
        for (int n = 0; n <= o.max_index; ++n) {
            if (o.shape == FamilyShape::AnnihilationOnly && (m != 0 || n == 0)) continue;
            if (o.shape == FamilyShape::CreationOnly && (n != 0 || m == 0)) continue;
            slots.push_back({m, n});
        }
    const int count = 1 + rng.below(std::min(o.max_components, int(slots.size())));
    KernelSequence s;
    for (int i = 0; i < count; ++i) {
        const int j = i + rng.below(int(slots.size()) - i);
        std::swap(slots[i], slots[j]);
        s.insert(random_component(rng, slots[i].first, slots[i].second, o));
    }
    return s;
}

}  // namespace wicknorm
