#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"
#include "curves.hpp"
#include "kernels.hpp"
#include "mc.hpp"
#include "norms.hpp"
#include "specfun.hpp"
#include "wick.hpp"

namespace wicknorm {

// ---------------------------------------------------------------------------
// p < 2: a finite-norm kernel whose matrix elements between finite vectors blow up.

struct PLt2Family {
    NormParams np;
    int m = 1, n = 1;
    KernelComponent w;      // (m, n)
    KernelComponent psi_m;  // (m, 0) wavefunction profiles
    KernelComponent psi_n;  // (n, 0)
    KernelSequence sequence;
    KernelSequence test_vectors;

    double exponent() const { return np.d - 1.5 + np.lambda / np.p; }  // r-power of the matrix-element integrand
};

inline KernelComponent p_lt2_test_vector(int m, const NormParams& np) {
    KernelComponent psi;
    psi.m = m;
    psi.n = 0;
    psi.creation = {0.0, np.p / (2 + np.p), np.rho / 2};
    psi.constraint = SimplexJoint{np.rho, SimplexScope::Creation};
    psi.dimension = np.d;
    return psi;
}

inline PLt2Family build_p_lt2_family(double p, NormParams np, int m = 1, int n = 1) {
    if (!(p >= 1 && p < 2)) throw DomainError("p<2 family: need 1 <= p < 2");
    if (m < 1 || n < 1) throw DomainError("p<2 family: need m, n >= 1");
    np.p = p;
    np.validate_cutoff();
    PLt2Family f;
    f.np = np;
    f.m = m;
    f.n = n;
    const RadialFactor prof{np.lambda / p, 2 / (2 + p), np.rho / 2};
    f.w.m = m;
    f.w.n = n;
    f.w.creation = prof;
    f.w.annihilation = prof;
    f.w.constraint = SimplexJoint{np.rho, SimplexScope::Each};
    f.w.dimension = np.d;
    f.psi_m = p_lt2_test_vector(m, np);
    f.psi_n = p_lt2_test_vector(n, np);
    f.sequence.insert(f.w);
    f.test_vectors.insert(f.psi_m);
    if (n != m) f.test_vectors.insert(f.psi_n);
    return f;
}

// L2 norm of a wavefunction profile (lambda = 0, p = 2).
inline NormResult test_vector_norm(const KernelComponent& psi, const McOptions& mc = {}) {
    return component_norm(psi, NormParams{0.0, 2.0, psi.dimension, constraint_bound(psi.constraint)}, mc);
}

namespace detail {

// O^m times the integral over {sum r <= rho, |r_i - c| >= delta} of prod r_i^e / |c - r_i|, c = rho/2.
inline McEstimate shell_integral(int m, double e, const NormParams& np, double delta, const McOptions& mc) {
    const double c = np.rho / 2, log_o = log_sphere_area(np.d);
    const double L = std::log(c / delta);
    if (m == 1) {
        double v;
        if (e == 0.0) {
            v = 2 * L;
        } else {
            boost::math::quadrature::tanh_sinh<double> q;
            auto f = [&](double u) {
                const double t = delta * std::exp(u * L);
                return std::pow(c - t, e) + std::pow(c + t, e);
            };
            v = L * q.integrate(f, 0.0, 1.0);
        }
        return {std::exp(log_o) * v, 0.0, 0, mc.seed};
    }
    if (m > mc_norm_max_dim) throw UnsupportedScale("shell integral: at most 12 coordinates");
    const double a = std::min(e, 0.0);
    auto log_density = [&](double r) {
        double g = (a + 1) * std::pow(r / np.rho, a) / np.rho;
        const double t = std::abs(r - c);
        if (t >= delta && t <= c) g += 1.0 / (2 * t * L);
        return std::log(0.5 * g);
    };
    auto draw = [&](Rng& rng) {
        std::array<double, mc_norm_max_dim> r{};
        double sum = 0, logw = 0;
        for (int i = 0; i < m; ++i) {
            if (rng.uniform() < 0.5) {
                const double t = delta * std::exp(rng.uniform() * L);
                r[i] = rng.uniform() < 0.5 ? c - t : c + t;
            } else {
                r[i] = np.rho * std::pow(rng.uniform(), 1 / (a + 1));
            }
            if (std::abs(r[i] - c) < delta) return 0.0;
            sum += r[i];
            logw += e * std::log(r[i]) - std::log(std::abs(c - r[i])) - log_density(r[i]);
        }
        if (sum > np.rho) return 0.0;
        return std::exp(logw + m * log_o);
    };
    return monte_carlo(draw, mc);
}

}  // namespace detail

// <psi_m | W_{m,n} psi_n> restricted to momenta at distance >= delta from the singular sphere.
inline McEstimate truncated_matrix_element(const PLt2Family& f, double delta, const McOptions& mc = {}) {
    if (!(delta > 0 && delta < f.np.rho / 2)) throw PreconditionError("matrix element: need 0 < delta < rho/2");
    const double e = f.exponent();
    if (!(e > -1)) throw DomainError("matrix element: integrand not integrable at the origin");
    const McEstimate a = detail::shell_integral(f.m, e, f.np, delta, mc);
    McOptions mc2 = mc;
    mc2.seed = stream_seed(mc.seed, 1);
    const McEstimate b = f.n == f.m ? a : detail::shell_integral(f.n, e, f.np, delta, mc2);
    McEstimate out{a.value * b.value, 0.0, a.samples + b.samples, mc.seed};
    out.std_error = std::hypot(a.std_error * b.value, b.std_error * a.value);
    return out;
}

inline std::vector<double> default_delta_grid(double rho) {
    return {rho / 4, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
}

// Slope of log(value) against log(log(c/delta)), c = rho/2; predicted m + n.
inline DivergenceCurve matrix_element_divergence_probe(const PLt2Family& f, const std::vector<double>& deltas,
                                                       const McOptions& mc = {}) {
    if (!(f.np.p < 2)) throw PreconditionError("matrix element probe: p must be below 2");
    DivergenceCurve cur;
    cur.parameter_name = "delta";
    cur.value_name = "matrix_element";
    cur.aux_name = "kernel_norm";
    cur.scale = SlopeScale::LogLogOfLog;
    cur.reference = f.np.rho / 2;
    cur.predicted_slope = f.m + f.n;
    cur.slope_tolerance = 0.10;
    cur.aux_tolerance = 0.05;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        McOptions o = mc;
        o.seed = mc.seed + i;
        const McEstimate v = truncated_matrix_element(f, deltas[i], o);
        const NormResult kn = component_norm(f.w, f.np, o);
        cur.points.push_back({deltas[i], std::log(v.value), kn.value()});
    }
    cur.finalize();
    return cur;
}

// Below the lambda threshold: truncated inner integral against delta, fitted on increments.
inline DivergenceCurve lambda_threshold_probe(const NormParams& np, const std::vector<double>& deltas) {
    DivergenceCurve cur;
    cur.parameter_name = "delta";
    cur.value_name = "inner_integral";
    cur.scale = SlopeScale::LogLogIncrements;
    cur.predicted_slope = inner_integral_exponent(np);
    cur.slope_tolerance = 0.01;
    for (double dl : deltas) cur.points.push_back({dl, std::log(divergence_probe_inner_integral(np, dl))});
    cur.finalize();
    return cur;
}

inline std::vector<double> geometric_grid(double first, double ratio, int count) {
    std::vector<double> g;
    for (int i = 0; i < count; ++i) g.push_back(first * std::pow(ratio, i));
    return g;
}

// ---------------------------------------------------------------------------
// Epsilon family: w has only (0, n) components, v is the mirror.

struct EpsFamily {
    EpsConfig cfg;
    double eps = 0;
    KernelSequence w;
    KernelSequence v;
};

inline EpsFamily build_eps_family(double eps, const EpsConfig& cfg) {
    cfg.validate();
    if (!(eps > 0)) throw DomainError("epsilon family: eps must be positive");
    const NormParams np = cfg.params();
    EpsFamily f{cfg, eps, {}, {}};
    auto gen_w = [np, eps, cfg](int, int n) {
        KernelComponent c = eps_unit_component(n, eps, np);
        c.log_coeff = log_normalized_counterexample_coefficient(n, eps, np, cfg.D, cfg.kappa);
        return c;
    };
    auto gen_v = [gen_w](int m, int) { return mirror(gen_w(0, m)); };
    const TailModel tail{cfg.D.value(0), cfg.kappa, 1};
    f.w = KernelSequence::generated(SupportPattern::AnnihilationRow, gen_w, tail);
    f.v = KernelSequence::generated(SupportPattern::CreationColumn, gen_v, tail);
    return f;
}

struct EpsDivergenceOptions {
    double tolerance = 1e-3;         // relative tail of the M-sum
    int initial_terms = 1024;
    int max_terms = 1 << 27;
    int norm_index = 1000;           // truncation of the recorded input norm
    std::vector<int> mmax_grid = {100, 1000, 10000, 100000, 1000000};
};

namespace detail {

// Pieces of D(M) g(M), the per-side factor of the q = 1 bound weighted by D(M):
// log term = log(D(M)/D(M+1)) + (1 - kappa) log(M+1) + log_p0 + (lgamma(z) - lgamma(z+s))/p, z = (M+1)eps + 1.
struct Q1SideSum {
    EpsConfig cfg;
    double eps, s, log_p0, log_pref;

    Q1SideSum(const EpsConfig& c, double e) : cfg(c), eps(e) {
        const double X = 2 * c.lambda - 2 * c.d + 2 * e + (c.d - 1) * c.p;
        s = X - e;
        const double half = c.rho / 2;
        log_p0 = ((X - e) * std::log(half) + log_gamma(X + 1) - log_sphere_area(c.d) - log_gamma(e)) / c.p;
        log_pref = log_q1_prefactor(e, c);
    }
    double log_term(int M) const {
        const double z = (M + 1) * eps + 1;
        return cfg.D.log_ratio(M) + (1 - cfg.kappa) * std::log(M + 1.0) + log_p0 +
               std::log(boost::math::tgamma_delta_ratio(z, s)) / cfg.p;
    }
    // Exponent of (M+1) in the large-M term bound; the sum converges iff it is below -1.
    double tail_power() const { return 1 - cfg.kappa - s / cfg.p; }
    double tail_bound(int K) const {
        const auto R = cfg.D.ratio_sup_from(K + 1);
        if (!R) throw PreconditionError("theorem42: weight ratio supremum unavailable");
        const double beta = -tail_power();
        if (!(beta > 1)) return inf;
        const double zk = (K + 2) * eps + 1;
        return *R * std::exp(log_p0 + s / (cfg.p * zk) - (s / cfg.p) * std::log(eps)) *
               std::pow(K + 1.0, 1 - beta) / (beta - 1);
    }
};

}  // namespace detail

struct Q1WeightedSum {
    double log_value = -inf;  // log of the certified lower bound pref * partial^2
    double partial = 0;       // sum_{M <= K} D(M) g(M)
    double tail = inf;
    int terms = 0;
};

// sum over (M, N) of D(M) D(N) * q1_lower_bound_norm(M, N, a); truncated at a certified relative tail.
inline Q1WeightedSum q1_weighted_sum(double a, const EpsConfig& cfg, const EpsDivergenceOptions& opt = {}) {
    cfg.validate();
    const detail::Q1SideSum side(cfg, 1.0 / a);
    if (side.tail_power() >= -1)
        throw PreconditionError("theorem42: the M-sum diverges at fixed a for these parameters");
    NeumaierSum sum;
    int K = 0, target = opt.initial_terms;
    Q1WeightedSum out;
    while (true) {
        for (; K < target; ++K) sum.add(std::exp(side.log_term(K)));
        out.partial = sum.value();
        out.tail = side.tail_bound(K - 1);
        if (out.tail <= opt.tolerance * out.partial || target >= opt.max_terms) break;
        target *= 2;
    }
    out.terms = K;
    out.log_value = side.log_pref + 2 * std::log(out.partial);
    return out;
}

inline int eps_family_b(const EpsConfig& cfg) {
    return int(std::floor(2 * cfg.lambda - 2 * cfg.d + (cfg.d - 1) * cfg.p)) + 1;
}

inline DivergenceCurve theorem42_divergence(const EpsConfig& cfg, const std::vector<double>& a_values,
                                            const EpsDivergenceOptions& opt = {}) {
    cfg.validate();
    if (a_values.empty()) throw PreconditionError("theorem42: empty a grid");
    DivergenceCurve cur;
    cur.value_name = "q1_weighted_bound";
    cur.aux_name = "input_norm";
    const int b = eps_family_b(cfg);
    const detail::Q1SideSum probe(cfg, 1.0 / a_values.front());
    if (probe.tail_power() < -1) {
        cur.parameter_name = "a";
        cur.predicted_slope = 2 * (2 - cfg.kappa - 1 / cfg.p);
        cur.slope_tolerance = 0.15;
        cur.aux_tolerance = 1e-12;
        for (double a : a_values) {
            const Q1WeightedSum s = q1_weighted_sum(a, cfg, opt);
            const EpsFamily f = build_eps_family(1.0 / a, cfg);
            const SequenceNorm wn = sequence_norm(f.w, cfg.D, cfg.params(), opt.norm_index);
            cur.points.push_back({a, s.log_value, wn.partial});
        }
        cur.note = "b=" + std::to_string(b) + "; a-slope of the q=1 bound sum";
    } else {
        // The M-sum diverges at fixed a: report partial-sum growth in M_max at the smallest a.
        const double a = a_values.front();
        cur.parameter_name = "M_max";
        const double pw = 2 * (2 + probe.tail_power());
        if (pw > 0.05) cur.predicted_slope = pw;
        cur.slope_tolerance = 0.15;
        NeumaierSum sum;
        int K = 0;
        for (int mmax : opt.mmax_grid) {
            for (; K <= mmax; ++K) sum.add(std::exp(probe.log_term(K)));
            cur.points.push_back({double(mmax), probe.log_pref + 2 * std::log(sum.value())});
        }
        cur.note = "b=" + std::to_string(b) + "; M-sum diverges at a=" + std::to_string(a);
    }
    cur.finalize();
    return cur;
}

// ---------------------------------------------------------------------------
// p = infinity: c_n = 1/(D(n) n^2), alpha = lambda.

struct InfFamily {
    NormParams np;
    WeightFunction D;
    KernelSequence w;
    KernelSequence v;
};

inline InfFamily build_inf_family(const NormParams& np, const WeightFunction& D) {
    np.validate_cutoff();
    if (!np.p_infinite()) throw DomainError("p=inf family: p must be infinite");
    InfFamily f{np, D, {}, {}};
    auto gen_w = [np, D](int, int n) {
        KernelComponent c;
        c.n = n;
        c.log_coeff = -D.log_value(n) - 2 * std::log(double(n));
        c.annihilation.alpha = np.lambda;
        c.constraint = SimplexJoint{np.rho / 2, SimplexScope::Annihilation};
        c.dimension = np.d;
        return c;
    };
    auto gen_v = [gen_w](int m, int) { return mirror(gen_w(0, m)); };
    const TailModel tail{D.value(0), 2.0, 1};
    f.w = KernelSequence::generated(SupportPattern::AnnihilationRow, gen_w, tail);
    f.v = KernelSequence::generated(SupportPattern::CreationColumn, gen_v, tail);
    return f;
}

inline double inf_family_constant(const NormParams& np) {
    const double y0 = 2 * np.lambda + np.d - 1;
    if (!(y0 > 0)) return inf;
    return std::exp(2 * log_sphere_area(np.d) + 2 * y0 * std::log(np.rho / 2) + 2 * log_gamma(y0) - std::log(2.0) -
                    log_gamma(2 * y0 + 1));
}

inline std::vector<double> default_mmax_grid() { return {1000, 2000, 4000, 8000, 16000}; }

inline DivergenceCurve inf_family_divergence(const NormParams& np, const WeightFunction& D,
                                            const std::vector<double>& mmax_grid) {
    if (classify_weight(D).cls != RatioClass::SlowRatio)
        throw PreconditionError("thm43 requires a SlowRatio weight");
    DivergenceCurve cur;
    cur.parameter_name = "M_max";
    cur.value_name = "q2_weighted_bound";
    if (np.lambda <= (1.0 - np.d) / 2) {
        cur.verdict = Verdict::AnalyticDivergence;
        cur.note = "inner integral diverges for lambda <= (1-d)/2";
        return cur;
    }
    build_inf_family(np, D);
    cur.predicted_slope = 2.0;
    cur.slope_tolerance = 0.10;
    const double log_const = std::log(inf_family_constant(np));
    NeumaierSum sum;
    int M = 1;
    for (double mm : mmax_grid) {
        const int K = int(mm);
        for (; M <= K; ++M)
            sum.add(std::exp(D.log_ratio(M) + D.log_ratio(M + 1) + 2 * std::log(M / (M + 2.0))));
        cur.points.push_back({mm, log_const + 2 * std::log(sum.value())});
    }
    cur.finalize();
    return cur;
}

// ---------------------------------------------------------------------------
// Sequences with a_n / a_{n+1} -> 0.

struct SequenceSpec {
    enum class Kind { Factorial, SuperExp, Tabulated };
    Kind kind = Kind::Factorial;
    double c = 2.0;               // SuperExp: log a_n = n^2 log c
    std::vector<double> log_table; // Tabulated: log a_n at index n (index 0 unused)

    static SequenceSpec factorial() { return {}; }
    static SequenceSpec super_exp(double c) {
        if (!(c > 1)) throw DomainError("super-exponential sequence: c must exceed 1");
        return {Kind::SuperExp, c, {}};
    }
    static SequenceSpec tabulated(std::vector<double> values) {
        SequenceSpec s{Kind::Tabulated, 0, {}};
        for (double v : values) {
            if (!(v > 0)) throw DomainError("tabulated sequence: values must be positive");
            s.log_table.push_back(std::log(v));
        }
        return s;
    }

    std::optional<double> log_a(double n) const {
        switch (kind) {
            case Kind::Factorial: return log_gamma(n + 1);
            case Kind::SuperExp: return n * n * std::log(c);
            case Kind::Tabulated:
                if (n >= double(log_table.size())) return std::nullopt;
                return log_table[std::size_t(n)];
        }
        return std::nullopt;
    }
    std::string describe() const {
        switch (kind) {
            case Kind::Factorial: return "factorial";
            case Kind::SuperExp: return "superexp:" + std::to_string(c);
            case Kind::Tabulated: return "tabulated:" + std::to_string(log_table.size());
        }
        return "?";
    }
};

inline double lemma_growth_threshold() { return 1e6; }

// b_n = a_{2n} / (a_n^2 n^kappa), n = 1..n_max. Verdict on max b_n against b_1.
inline DivergenceCurve sequence_lemma_probe(const SequenceSpec& a, double kappa, int n_max) {
    if (!(kappa >= 0)) throw DomainError("sequence probe: kappa must be non-negative");
    if (n_max < 2) throw PreconditionError("sequence probe: n_max must be at least 2");
    DivergenceCurve cur;
    cur.parameter_name = "n";
    cur.value_name = "b_n";
    cur.scale = SlopeScale::None;
    cur.require_monotone = false;
    cur.required_growth = lemma_growth_threshold();
    bool ratio_falls = true;
    double prev_ratio = inf;
    for (int n = 1; n <= n_max; ++n) {
        const auto a2n = a.log_a(2.0 * n), an = a.log_a(n);
        if (!a2n || !an) break;
        cur.points.push_back({double(n), *a2n - 2 * *an - kappa * std::log(double(n))});
    }
    for (int n = 1; n < 2 * n_max; ++n) {
        const auto x = a.log_a(n), y = a.log_a(n + 1.0);
        if (!x || !y) break;
        const double r = *x - *y;
        if (r > prev_ratio + 1e-12) ratio_falls = false;
        prev_ratio = r;
    }
    if (cur.points.size() < 2) {
        cur.note = "sequence too short";
        return cur;
    }
    double mx = -inf;
    for (const auto& p : cur.points) mx = std::max(mx, p.log_value);
    const bool grows = mx - cur.points.front().log_value > std::log(cur.required_growth);
    cur.verdict = grows && ratio_falls ? Verdict::DivergenceConfirmed : Verdict::Inconclusive;
    if (!ratio_falls) cur.note = "a_n/a_{n+1} not decreasing on the evaluated range";
    return cur;
}

// Contradiction bound a_{2^n} <= (1/K)(2^kappa a_1 K)^{2^n}; returns the first n <= n_max violating it.
inline std::optional<int> contradiction_bound_violation(const SequenceSpec& a, double kappa, double K, int n_max) {
    if (!(K > 0)) throw DomainError("contradiction bound: K must be positive");
    const auto la1 = a.log_a(1);
    if (!la1) return std::nullopt;
    for (int n = 0; n <= n_max; ++n) {
        const double two_n = std::ldexp(1.0, n);
        const auto lhs = a.log_a(two_n);
        if (!lhs) return std::nullopt;
        const double rhs = -std::log(K) + two_n * (kappa * std::log(2.0) + *la1 + std::log(K));
        if (*lhs > rhs) return n;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Box family on m, n >= 1 with fast-growing weight.

struct BoxConfig {
    int d = 1;
    double p = 2.0;
    double lambda = 1.0;
    double rho = 1.0;
    double kappa = 1.1;
    WeightFunction D = WeightFunction::factorial();

    NormParams params() const { return {lambda, p, d, rho}; }
    void validate() const {
        params().validate_cutoff();
        if (!(kappa > 1)) throw DomainError("box family: kappa must exceed 1");
    }
};

inline KernelComponent box_unit_component(int m, int n, const NormParams& np) {
    KernelComponent c;
    c.m = m;
    c.n = n;
    const double alpha = np.p_infinite() ? np.lambda : np.lambda / np.p;
    c.creation.alpha = alpha;
    c.annihilation.alpha = alpha;
    c.constraint = BoxPerCoordinate{np.rho / (2.0 * (m + n))};
    c.dimension = np.d;
    return c;
}

inline KernelSequence build_box_family(const BoxConfig& cfg) {
    cfg.validate();
    const NormParams np = cfg.params();
    auto gen = [np, cfg](int m, int n) {
        KernelComponent c = box_unit_component(m, n, np);
        const NormResult u = component_norm(c, np);
        if (u.infinite) throw DomainError("box family: unit component has infinite norm");
        c.log_coeff = -u.log_value - cfg.D.log_value(m) - cfg.D.log_value(n) -
                      cfg.kappa * (std::log(double(m)) + std::log(double(n)));
        return c;
    };
    return KernelSequence::generated(SupportPattern::Grid, gen, TailModel{1.0, cfg.kappa, 2});
}

struct BoxNormCheck {
    double partial = 0;        // sum over m, n <= K
    double tail_bound = inf;   // (S+T)^2 - S^2
    double factorization_error = 0;  // max relative deviation of t(m,n) from t(m,1)t(1,n)/t(1,1), m,n <= grid
};

// Weighted norm of the box family up to index K via row sums; the grid check verifies the
// product structure the row sums rely on.
inline BoxNormCheck box_family_norm_check(const BoxConfig& cfg, int K, int grid = 50) {
    const KernelSequence w = build_box_family(cfg);
    const NormParams np = cfg.params();
    auto term = [&](int m, int n) {
        return std::exp(cfg.D.log_value(m) + cfg.D.log_value(n) + component_norm(*w.component(m, n), np).log_value);
    };
    BoxNormCheck out;
    const double t11 = term(1, 1);
    for (int m = 1; m <= grid; ++m)
        for (int n = 1; n <= grid; ++n) {
            const double f = term(m, 1) * term(1, n) / t11;
            out.factorization_error = std::max(out.factorization_error, std::abs(term(m, n) / f - 1));
        }
    NeumaierSum rows, cols;
    for (int m = K; m >= 1; --m) {
        rows.add(term(m, 1));
        cols.add(term(1, m));
    }
    out.partial = rows.value() * cols.value() / t11;
    const double S = zeta_partial(K, cfg.kappa), T = zeta_tail_bound(K, cfg.kappa);
    out.tail_bound = (S + T) * (S + T) - S * S;
    return out;
}

// log of D(2M) ||w_{M,M}||, the square root of the diagonal lower-bound summand.
inline double box_family_log_term(const KernelSequence& w, int M, const BoxConfig& cfg) {
    return cfg.D.log_value(2 * M) + 0.5 * log_fastgrowing_component_lower_bound(w, w, M, M, cfg.params());
}

inline DivergenceCurve box_family_divergence(const BoxConfig& cfg, int M_max) {
    if (classify_weight(cfg.D).cls != RatioClass::FastRatio)
        throw PreconditionError("thm52 requires a FastRatio weight");
    if (M_max < 2) throw PreconditionError("thm52: M_max must be at least 2");
    const KernelSequence w = build_box_family(cfg);
    DivergenceCurve cur;
    cur.parameter_name = "M_max";
    cur.value_name = "diagonal_bound";
    cur.scale = SlopeScale::None;
    cur.required_growth = 1e6;
    double log_s = -inf;
    for (int M = 1; M <= M_max; ++M) {
        log_s = log_sum_exp(log_s, box_family_log_term(w, M, cfg));
        cur.points.push_back({double(M), 2 * log_s});
    }
    cur.finalize();
    return cur;
}

// ---------------------------------------------------------------------------
// Which probe applies to a (lambda, p, D) cell.

enum class ProbeKind { MatrixElement, LambdaThreshold, EpsFamily, InfFamily, BoxFamily, None };

inline const char* to_string(ProbeKind k) {
    switch (k) {
        case ProbeKind::MatrixElement: return "matrix-element";
        case ProbeKind::LambdaThreshold: return "lambda-threshold";
        case ProbeKind::EpsFamily: return "thm42";
        case ProbeKind::InfFamily: return "thm43";
        case ProbeKind::BoxFamily: return "thm52";
        case ProbeKind::None: return "none";
    }
    return "?";
}

inline ProbeKind select_probe(const NormParams& np, const WeightFunction& D) {
    np.validate();
    if (np.p < 2) return ProbeKind::MatrixElement;
    if (!np.p_infinite() && np.lambda < np.d * (1 - np.p / 2) + np.p / 2) return ProbeKind::LambdaThreshold;
    switch (classify_weight(D).cls) {
        case RatioClass::SlowRatio: return np.p_infinite() ? ProbeKind::InfFamily : ProbeKind::EpsFamily;
        case RatioClass::FastRatio: return ProbeKind::BoxFamily;
        default: return ProbeKind::None;
    }
}

// Runs the selected probe with desk-scale defaults.
inline DivergenceCurve run_probe(const NormParams& np, const WeightFunction& D, const McOptions& mc = {}) {
    switch (select_probe(np, D)) {
        case ProbeKind::MatrixElement:
            return matrix_element_divergence_probe(build_p_lt2_family(np.p, np), default_delta_grid(np.rho), mc);
        case ProbeKind::LambdaThreshold:
            return lambda_threshold_probe(np, geometric_grid(np.rho / 4, 0.1, 8));
        case ProbeKind::EpsFamily: {
            EpsConfig cfg;
            cfg.d = np.d;
            cfg.p = np.p;
            cfg.lambda = np.lambda;
            cfg.rho = np.rho;
            cfg.D = D;
            return theorem42_divergence(cfg, {1e2, 1e3, 1e4});
        }
        case ProbeKind::InfFamily: return inf_family_divergence(np, D, default_mmax_grid());
        case ProbeKind::BoxFamily: {
            BoxConfig cfg;
            cfg.d = np.d;
            cfg.p = np.p;
            cfg.lambda = np.lambda;
            cfg.rho = np.rho;
            cfg.D = D;
            return box_family_divergence(cfg, 30);
        }
        case ProbeKind::None: break;
    }
    throw PreconditionError("no divergence probe applies to this weight");
}

}  // namespace wicknorm
