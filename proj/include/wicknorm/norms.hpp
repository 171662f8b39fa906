#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "kernels.hpp"
#include "mc.hpp"
#include "specfun.hpp"

namespace wicknorm {

enum class NormMethod { ClosedForm, MonteCarlo, SupSearch };

inline const char* to_string(NormMethod m) {
    switch (m) {
        case NormMethod::ClosedForm: return "ClosedForm";
        case NormMethod::MonteCarlo: return "MonteCarlo";
        case NormMethod::SupSearch: return "SupSearch";
    }
    return "?";
}

struct NormResult {
    double log_value = -inf;
    bool infinite = false;
    NormMethod method = NormMethod::ClosedForm;
    std::optional<McEstimate> mc;  // estimate of the norm itself
    std::string divergent_reason;

    double value() const { return infinite ? inf : std::exp(log_value); }
    double std_error() const { return mc ? mc->std_error : 0.0; }

    static NormResult divergent(std::string why, NormMethod m = NormMethod::ClosedForm) {
        NormResult r;
        r.infinite = true;
        r.log_value = inf;
        r.method = m;
        r.divergent_reason = std::move(why);
        return r;
    }
};

namespace detail {

// log of the integral of prod s_i^{x-1} over the n-simplex of size b.
inline double log_simplex_group(int n, double x, double b) {
    if (n == 0) return 0.0;
    return log_simplex_gamma_integral({n, 0, b, x, 0.0});
}

// log of the integral over the kernel's support of prod r_i^{xc-1} prod r~_j^{xa-1}.
inline double log_support_integral(const KernelComponent& k, double xc, double xa) {
    const int m = k.m, n = k.n;
    if (const auto* box = std::get_if<BoxPerCoordinate>(&k.constraint)) {
        const double lb = std::log(box->bound);
        double v = 0;
        if (m) v += m * (xc * lb - std::log(xc));
        if (n) v += n * (xa * lb - std::log(xa));
        return v;
    }
    const auto& s = std::get<SimplexJoint>(k.constraint);
    switch (s.scope) {
        case SimplexScope::Joint:
            if (m == 0) return log_simplex_group(n, xa, s.bound);
            if (n == 0 || xc == xa) return log_simplex_group(m + n, xc, s.bound);
            return (m * xc + n * xa) * std::log(s.bound) + m * log_gamma(xc) + n * log_gamma(xa) -
                   log_gamma(1.0 + m * xc + n * xa);
        case SimplexScope::Creation: return log_simplex_group(m, xc, s.bound) - (n ? n * std::log(xa) : 0.0);
        case SimplexScope::Annihilation: return log_simplex_group(n, xa, s.bound) - (m ? m * std::log(xc) : 0.0);
        case SimplexScope::Each: return log_simplex_group(m, xc, s.bound) + log_simplex_group(n, xa, s.bound);
    }
    return nan;
}

// Upper end of the range of a single coordinate allowed by the constraint.
inline double coordinate_range(const KernelComponent& k, bool creation_side) {
    if (const auto* box = std::get_if<BoxPerCoordinate>(&k.constraint)) return box->bound;
    const bool in = creation_side ? creation_in_simplex(k.constraint) : annihilation_in_simplex(k.constraint);
    return in ? constraint_bound(k.constraint) : 1.0;
}

// Proposal on [0, R] for h(r) = r^a |c - r|^{-b}: equal mixture of a power law
// at the origin and a power law in the distance to c, which keeps h/g bounded.
struct SingularProposal {
    double R = 1, a = 0, b = 0, c = 0;

    double origin_exp() const { return std::min(a, 0.0); }
    bool has_center() const { return b > 0 && c > 0; }
    // t ranges of the left (r = c - t) and right (r = c + t) branches.
    std::pair<double, double> left() const { return {std::max(0.0, c - R), c}; }
    std::pair<double, double> right() const { return {0.0, std::max(0.0, R - c)}; }
    double branch_mass(std::pair<double, double> t) const {
        return std::pow(t.second, 1 - b) - std::pow(t.first, 1 - b);
    }

    // Draws r and its distance to c; the distance is kept separately because
    // c - r rounds to zero for draws very close to the center.
    struct Draw {
        double r, dist;
        bool right;
    };

    Draw sample(Rng& rng) const {
        const double u = rng.uniform();
        if (!has_center() || rng.uniform() < 0.5) {
            const double r = R * std::pow(u, 1.0 / (origin_exp() + 1.0));
            return {r, std::abs(c - r), r > c};
        }
        const auto l = left(), r = right();
        const bool use_right = r.second > 0 && (l.second <= l.first || rng.uniform() < 0.5);
        const auto t = use_right ? r : l;
        const double tt = std::pow(std::pow(t.first, 1 - b) + u * branch_mass(t), 1.0 / (1 - b));
        return use_right ? Draw{std::min(c + tt, R), tt, true} : Draw{std::max(c - tt, 0.0), tt, false};
    }

    double log_weight(const Draw& x) const {
        return a * std::log(x.r) - b * std::log(x.dist) - log_density(x.r, x.dist, x.right);
    }

    double log_density(double r, double t, bool on_right) const {
        const double e = origin_exp();
        const double g0 = (e + 1) * std::pow(r, e) / std::pow(R, e + 1);
        if (!has_center()) return std::log(g0);
        const auto l = left(), rt = right();
        const bool both = rt.second > 0 && l.second > l.first;
        double gc = 0;
        const auto br = on_right ? rt : l;
        if (t >= br.first && t <= br.second && br.second > br.first) {
            gc = (1 - b) * std::pow(t, -b) / branch_mass(br);
            if (both) gc *= 0.5;
        }
        return std::log(0.5 * g0 + 0.5 * gc);
    }
};

inline NormResult sup_norm_analytic(const KernelComponent& k, const NormParams& np) {
    NormResult res;
    res.method = NormMethod::ClosedForm;
    if ((k.m && k.creation.singular()) || (k.n && k.annihilation.singular()))
        return NormResult::divergent("singular factor is unbounded near its center");
    const double ec = k.creation.alpha - np.lambda, ea = k.annihilation.alpha - np.lambda;
    if ((k.m && ec < 0) || (k.n && ea < 0)) return NormResult::divergent("alpha - lambda < 0: unbounded at the origin");
    double v = k.log_coeff;
    auto simplex_max = [](int cnt_a, double a, int cnt_b, double b, double bound) {
        // max of sum of exponent * log r over {sum r <= bound}: r_i = bound e_i / E
        const double E = cnt_a * a + cnt_b * b;
        if (E <= 0) return 0.0;
        double out = 0;
        if (cnt_a && a > 0) out += cnt_a * a * std::log(bound * a / E);
        if (cnt_b && b > 0) out += cnt_b * b * std::log(bound * b / E);
        return out;
    };
    if (const auto* box = std::get_if<BoxPerCoordinate>(&k.constraint)) {
        v += (k.m * ec + k.n * ea) * std::log(box->bound);
    } else {
        const auto& s = std::get<SimplexJoint>(k.constraint);
        switch (s.scope) {
            case SimplexScope::Joint: v += simplex_max(k.m, ec, k.n, ea, s.bound); break;
            case SimplexScope::Creation: v += simplex_max(k.m, ec, 0, 0, s.bound); break;
            case SimplexScope::Annihilation: v += simplex_max(0, 0, k.n, ea, s.bound); break;
            case SimplexScope::Each: v += simplex_max(k.m, ec, 0, 0, s.bound) + simplex_max(0, 0, k.n, ea, s.bound); break;
        }
    }
    res.log_value = v;
    return res;
}

}  // namespace detail

inline constexpr int mc_norm_max_dim = 12;

// ||w_{m,n}||_{lambda,p}. Closed form for monomial profiles and for p = inf;
// Monte Carlo for singular profiles at finite p.
inline NormResult component_norm(const KernelComponent& k, const NormParams& np, const McOptions& mc = {}) {
    np.validate();
    k.validate();
    if (k.dimension != np.d) throw PreconditionError("component_norm: kernel dimension differs from d");
    if (k.m + k.n == 0) {
        NormResult r;
        r.log_value = k.log_coeff;
        return r;
    }
    if (np.p_infinite()) return detail::sup_norm_analytic(k, np);

    const double p = np.p, d = np.d;
    const double xc = p * k.creation.alpha - np.lambda + d;
    const double xa = p * k.annihilation.alpha - np.lambda + d;
    if ((k.m && xc <= 0) || (k.n && xa <= 0)) return NormResult::divergent("p*alpha - lambda + d <= 0");
    const double log_o = log_sphere_area(np.d);

    if (k.monomial()) {
        NormResult r;
        r.log_value = k.log_coeff + ((k.m + k.n) * log_o + detail::log_support_integral(k, xc, xa)) / p;
        return r;
    }

    for (const auto* f : {&k.creation, &k.annihilation}) {
        if (f == &k.creation ? !k.m : !k.n) continue;
        if (f->singular() && p * f->beta >= 1 && f->singular_center <= 1)
            return NormResult::divergent("p*beta >= 1: singular factor not integrable", NormMethod::MonteCarlo);
    }
    if (k.m + k.n > mc_norm_max_dim) throw UnsupportedScale("component_norm: Monte Carlo limited to m + n <= 12");

    auto proposal = [&](const RadialFactor& f, double x, bool creation_side) {
        return detail::SingularProposal{detail::coordinate_range(k, creation_side), x - 1.0, p * f.beta,
                                        f.singular_center};
    };
    const auto pc = proposal(k.creation, xc, true);
    const auto pa = proposal(k.annihilation, xa, false);
    auto draw = [&](Rng& rng) {
        std::array<double, mc_norm_max_dim> kr{}, ka{};
        double logw = 0;
        for (int i = 0; i < k.m; ++i) {
            const auto x = pc.sample(rng);
            kr[i] = x.r;
            logw += pc.log_weight(x);
        }
        for (int j = 0; j < k.n; ++j) {
            const auto x = pa.sample(rng);
            ka[j] = x.r;
            logw += pa.log_weight(x);
        }
        if (!k.in_support(std::span<const double>(kr.data(), k.m), std::span<const double>(ka.data(), k.n)))
            return 0.0;
        return std::isfinite(logw) ? std::exp(logw) : 0.0;
    };
    McEstimate integral = monte_carlo(draw, mc);
    McEstimate norm = root_estimate(integral, p);
    const double scale = std::exp(k.log_coeff + (k.m + k.n) * log_o / p);
    norm.value *= scale;
    norm.std_error *= scale;
    NormResult r;
    r.method = NormMethod::MonteCarlo;
    r.log_value = norm.value > 0 ? std::log(norm.value) : -inf;
    r.mc = norm;
    return r;
}

// p = inf fallback: maximizes |w| / prod |k|^lambda over grid points of the support.
inline NormResult sup_search_norm(const KernelComponent& k, const NormParams& np, int grid_points = 10000,
                                  std::uint64_t seed = 7) {
    np.validate();
    k.validate();
    NormResult res;
    res.method = NormMethod::SupSearch;
    if (k.m + k.n == 0) {
        res.log_value = k.log_coeff;
        return res;
    }
    const int dim = k.m + k.n;
    std::vector<double> r(dim);
    auto ratio_at = [&]() {
        std::span<const double> kc(r.data(), k.m), ka(r.data() + k.m, k.n);
        if (!k.in_support(kc, ka)) return -inf;
        double v = k.log_coeff;
        for (double x : kc) v += k.creation.log_at(x) - np.lambda * std::log(x);
        for (double x : ka) v += k.annihilation.log_at(x) - np.lambda * std::log(x);
        return v;
    };
    double best = -inf;
    // Corner point: coordinates spread evenly over the support boundary.
    for (int i = 0; i < dim; ++i) {
        const bool cre = i < k.m;
        const bool joint_simplex = std::holds_alternative<SimplexJoint>(k.constraint);
        double share = detail::coordinate_range(k, cre);
        if (joint_simplex && (cre ? creation_in_simplex(k.constraint) : annihilation_in_simplex(k.constraint))) {
            const auto& s = std::get<SimplexJoint>(k.constraint);
            const int group = s.scope == SimplexScope::Joint ? dim : (cre ? k.m : k.n);
            share = s.bound / group;
        }
        r[i] = share;
    }
    best = std::max(best, ratio_at());
    if (dim == 1) {
        const double R = detail::coordinate_range(k, k.m == 1);
        for (int j = 1; j <= grid_points; ++j) {
            r[0] = R * j / grid_points;
            best = std::max(best, ratio_at());
        }
    } else {
        Rng rng(seed);
        for (int j = 0; j < grid_points; ++j) {
            for (int i = 0; i < dim; ++i) r[i] = detail::coordinate_range(k, i < k.m) * rng.uniform();
            best = std::max(best, ratio_at());
        }
    }
    res.log_value = best;
    return res;
}

struct SequenceNorm {
    double partial = 0.0;
    double std_error = 0.0;
    bool certified_finite = false;
    double tail_bound = inf;
    bool infinite = false;
    std::string reason;
    std::size_t terms = 0;
};

// sum_{m > K} m^{-kappa} <= K^{1-kappa} / (kappa - 1)
inline double zeta_tail_bound(int K, double kappa) {
    if (!(kappa > 1)) return inf;
    return std::pow(double(K), 1.0 - kappa) / (kappa - 1.0);
}

inline double zeta_partial(int K, double kappa) {
    NeumaierSum s;
    for (int m = K; m >= 1; --m) s.add(std::pow(double(m), -kappa));
    return s.value();
}

inline SequenceNorm sequence_norm(const KernelSequence& w, const WeightFunction& D, const NormParams& np,
                                  int max_index, const McOptions& mc = {}) {
    np.validate();
    SequenceNorm out;
    if (w.finite() && max_index < w.max_index())
        throw PreconditionError("sequence_norm: max_index below the largest populated index");
    NeumaierSum sum;
    double var = 0;
    for (auto [m, n] : w.indices(max_index)) {
        const NormResult r = component_norm(*w.component(m, n), np, mc);
        if (r.infinite) {
            out.infinite = true;
            out.partial = inf;
            out.reason = "component (" + std::to_string(m) + "," + std::to_string(n) + "): " + r.divergent_reason;
            out.certified_finite = false;
            return out;
        }
        const double logw = D.log_value(m) + D.log_value(n);
        sum.add(std::exp(logw + r.log_value));
        if (r.mc) var += std::pow(std::exp(logw) * r.mc->std_error, 2);
        ++out.terms;
    }
    out.partial = sum.value();
    out.std_error = std::sqrt(var);
    if (w.finite()) {
        out.certified_finite = true;
        out.tail_bound = 0.0;
    } else if (const auto& t = w.tail(); t && t->kappa > 1) {
        const int K = max_index;
        const double tail1 = zeta_tail_bound(K, t->kappa);
        if (t->rank == 1) {
            out.tail_bound = t->scale * tail1;
        } else {
            const double S = zeta_partial(K, t->kappa);
            out.tail_bound = t->scale * ((S + tail1) * (S + tail1) - S * S);
        }
        out.certified_finite = true;
    } else {
        out.reason = "no analytic tail model";
    }
    return out;
}

// Unit-coefficient component w_{0,m} of the epsilon family:
// |k~|^{(lambda-d+eps)/p} on {sum k~ <= rho/2}.
inline KernelComponent eps_unit_component(int m, double eps, const NormParams& np) {
    KernelComponent c;
    c.m = 0;
    c.n = m;
    c.log_coeff = 0.0;
    c.annihilation.alpha = (np.lambda - np.d + eps) / np.p;
    c.constraint = SimplexJoint{np.rho / 2, SimplexScope::Annihilation};
    c.dimension = np.d;
    return c;
}

inline double log_normalized_counterexample_coefficient(int m, double eps, const NormParams& np,
                                                        const WeightFunction& D, double kappa) {
    if (!(kappa > 1 && kappa < 1.5)) throw DomainError("normalized coefficient: kappa must lie in (1, 3/2)");
    if (!(eps > 0)) throw DomainError("normalized coefficient: eps must be positive");
    if (m < 1) throw DomainError("normalized coefficient: m must be at least 1");
    if (np.p_infinite()) throw DomainError("normalized coefficient: p must be finite");
    const NormResult unit = component_norm(eps_unit_component(m, eps, np), np);
    if (unit.infinite) throw DomainError("normalized coefficient: unit kernel has infinite norm");
    return -(unit.log_value + D.log_value(m) + kappa * std::log(double(m)));
}

inline double normalized_counterexample_coefficient(int m, double eps, const NormParams& np,
                                                    const WeightFunction& D, double kappa) {
    return std::exp(log_normalized_counterexample_coefficient(m, eps, np, D, kappa));
}

}  // namespace wicknorm
