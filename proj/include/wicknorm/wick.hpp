#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "kernels.hpp"
#include "mc.hpp"
#include "norms.hpp"
#include "specfun.hpp"

namespace wicknorm {

inline double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -inf;
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

// ---------------------------------------------------------------------------
// General product (w *_rho v)_{M,N} for finite sequences.

struct ProductTerm {
    int m = 0, n = 0, q = 0;
    KernelComponent w;  // w_{M-m, n+q}
    KernelComponent v;  // v_{m+q, N-n}
    double log_comb = 0;     // log [C(m+q,q) C(n+q,q) q!]
    double x_exponent = 0;   // e: contraction integrand is r^{e-1} per variable
    double log_x_factor = 0; // q log O + q log Gamma(e) - log Gamma(q e + 1)
};

class WickProduct {
public:
    WickProduct(const KernelSequence& w, const KernelSequence& v, int M, int N, const NormParams& np)
        : M_(M), N_(N), np_(np) {
        np.validate_cutoff();
        if (M < 0 || N < 0) throw PreconditionError("wick product: negative index");
        if (!w.finite() || !v.finite())
            throw UnsupportedFamily("wick product: general evaluation needs finitely supported sequences");
        const int qmax = std::max(w.max_index(), v.max_index());
        const double log_o = log_sphere_area(np.d);
        for (int m = 0; m <= M; ++m)
            for (int n = 0; n <= N; ++n)
                for (int q = 0; q <= qmax; ++q) {
                    auto wc = w.component(M - m, n + q);
                    auto vc = v.component(m + q, N - n);
                    if (!wc || !vc) continue;
                    ProductTerm t;
                    t.m = m;
                    t.n = n;
                    t.q = q;
                    t.w = *wc;
                    t.v = *vc;
                    if (t.w.dimension != np.d || t.v.dimension != np.d)
                        throw PreconditionError("wick product: kernel dimension differs from d");
                    t.log_comb = log_binomial(m + q, q) + log_binomial(n + q, q) + log_gamma(q + 1.0);
                    if (q > 0) {
                        if (t.w.annihilation.singular() || t.v.creation.singular())
                            throw UnsupportedFamily("wick product: contracted slots must be monomial");
                        t.x_exponent = t.w.annihilation.alpha + t.v.creation.alpha + np.d - 1.0;
                        if (t.x_exponent <= 0)
                            throw DomainError("wick product: contraction integral diverges (exponent <= 0)");
                        t.log_x_factor = q * (log_o + log_gamma(t.x_exponent)) - log_gamma(q * t.x_exponent + 1.0);
                    }
                    terms_.push_back(t);
                }
    }

    int M() const { return M_; }
    int N() const { return N_; }
    const NormParams& params() const { return np_; }
    const std::vector<ProductTerm>& terms() const { return terms_; }

    // Only the m = M, n = N summands are present.
    bool collapsed() const {
        return std::all_of(terms_.begin(), terms_.end(), [&](const ProductTerm& t) { return t.m == M_ && t.n == N_; });
    }

    double evaluate(std::span<const double> k, std::span<const double> kt) const {
        if (int(k.size()) != M_ || int(kt.size()) != N_) throw PreconditionError("wick product: wrong arity");
        NeumaierSum total;
        for (const auto& t : terms_) total.add(term_value(t, k, kt));
        return total.value();
    }

    // Average over permutations within each momentum group.
    double evaluate_symmetrized(std::span<const double> k, std::span<const double> kt) const {
        if (M_ > 5 || N_ > 5) throw UnsupportedScale("wick product: symmetrization limited to M, N <= 5");
        std::vector<int> pk(M_), pt(N_);
        std::iota(pk.begin(), pk.end(), 0);
        std::vector<double> kk(M_), tt(N_);
        double sum = 0;
        long count = 0;
        do {
            std::iota(pt.begin(), pt.end(), 0);
            do {
                for (int i = 0; i < M_; ++i) kk[i] = k[pk[i]];
                for (int j = 0; j < N_; ++j) tt[j] = kt[pt[j]];
                sum += evaluate(kk, tt);
                ++count;
            } while (std::next_permutation(pt.begin(), pt.end()));
        } while (std::next_permutation(pk.begin(), pk.end()));
        return sum / double(count);
    }

private:
    double term_value(const ProductTerm& t, std::span<const double> k, std::span<const double> kt) const {
        const int m = t.m, n = t.n;
        auto sum = [](std::span<const double> s) { return std::accumulate(s.begin(), s.end(), 0.0); };
        const auto v_cre = k.subspan(0, m), w_cre = k.subspan(m);
        const auto w_ann = kt.subspan(0, n), v_ann = kt.subspan(n);
        const double A = sum(w_cre), Bw = sum(w_ann), Cv = sum(v_cre), Dv = sum(v_ann);
        double tcut = np_.rho - Cv - Bw;
        double box = 1.0;
        bool ok = true;
        auto apply = [&](const KernelComponent& c, std::span<const double> fixed_cre, std::span<const double> fixed_ann,
                         double fixed_sum, double other_sum, bool contracted_on_annihilation) {
            if (const auto* b = std::get_if<BoxPerCoordinate>(&c.constraint)) {
                for (double r : fixed_cre) ok = ok && r <= b->bound;
                for (double r : fixed_ann) ok = ok && r <= b->bound;
                box = std::min(box, b->bound);
                return;
            }
            // fixed_sum: radii sharing the side with the contraction variables,
            // other_sum: radii on the opposite side.
            const auto& s = std::get<SimplexJoint>(c.constraint);
            const bool x_side_in = contracted_on_annihilation ? annihilation_in_simplex(c.constraint)
                                                              : creation_in_simplex(c.constraint);
            const bool other_in = contracted_on_annihilation ? creation_in_simplex(c.constraint)
                                                             : annihilation_in_simplex(c.constraint);
            if (s.scope == SimplexScope::Joint) {
                tcut = std::min(tcut, s.bound - fixed_sum - other_sum);
                return;
            }
            if (x_side_in) tcut = std::min(tcut, s.bound - fixed_sum);
            if (other_in) ok = ok && other_sum <= s.bound;
        };
        apply(t.w, w_cre, w_ann, Bw, A, true);
        apply(t.v, v_cre, v_ann, Cv, Dv, false);
        if (!ok || tcut <= 0) return 0.0;
        double log_val = t.log_comb + t.w.log_coeff + t.v.log_coeff;
        double prod = 1.0;
        for (double r : w_cre) prod *= t.w.creation(r);
        for (double r : w_ann) prod *= t.w.annihilation(r);
        for (double r : v_cre) prod *= t.v.creation(r);
        for (double r : v_ann) prod *= t.v.annihilation(r);
        if (t.q > 0) {
            const double e = t.x_exponent;
            if (box >= tcut) {
                log_val += t.log_x_factor + t.q * e * std::log(tcut);
            } else if (t.q == 1) {
                log_val += log_sphere_area(np_.d) + e * std::log(box) - std::log(e);
            } else {
                throw UnsupportedFamily("wick product: active box constraint on a multi-variable contraction");
            }
        }
        return std::exp(log_val) * prod;
    }

    int M_, N_;
    NormParams np_;
    std::vector<ProductTerm> terms_;
};

namespace detail {

// Coordinates 0..M-1 are creation radii, M..M+N-1 annihilation radii.
struct ProposalGroup {
    std::vector<int> coords;
    GroupProposal prop;
};

using ProposalLayout = std::vector<ProposalGroup>;

inline double group_shape(double s) { return std::clamp(s, 0.05, 1.0); }

// Partition of the coordinates into simplices/boxes containing the support of one term.
inline ProposalLayout layout_for_term(const ProductTerm& t, int M, int N, const NormParams& np) {
    std::vector<int> owner(M + N, -1);
    ProposalLayout out;
    auto exponent_of = [&](const RadialFactor& f) { return np.p * f.alpha - np.lambda + np.d; };
    auto add_group = [&](std::vector<int> coords, double bound, bool simplex, double shape) {
        std::erase_if(coords, [&](int c) { return owner[c] >= 0; });
        if (coords.empty()) return;
        for (int c : coords) owner[c] = int(out.size());
        out.push_back({coords, GroupProposal{int(coords.size()), bound, group_shape(shape), simplex}});
    };
    auto range = [](int a, int b) {
        std::vector<int> r;
        for (int i = a; i < b; ++i) r.push_back(i);
        return r;
    };
    const auto w_cre = range(t.m, M), w_ann = range(M, M + t.n);
    const auto v_cre = range(0, t.m), v_ann = range(M + t.n, M + N);
    auto place = [&](const KernelComponent& c, const std::vector<int>& cre, const std::vector<int>& ann) {
        const double sc = exponent_of(c.creation), sa = exponent_of(c.annihilation);
        if (const auto* b = std::get_if<BoxPerCoordinate>(&c.constraint)) {
            add_group(cre, b->bound, false, sc);
            add_group(ann, b->bound, false, sa);
            return;
        }
        const auto& s = std::get<SimplexJoint>(c.constraint);
        switch (s.scope) {
            case SimplexScope::Joint: {
                auto all = cre;
                all.insert(all.end(), ann.begin(), ann.end());
                add_group(all, s.bound, true, std::min(cre.empty() ? 1.0 : sc, ann.empty() ? 1.0 : sa));
                break;
            }
            case SimplexScope::Creation: add_group(cre, s.bound, true, sc); break;
            case SimplexScope::Annihilation: add_group(ann, s.bound, true, sa); break;
            case SimplexScope::Each:
                add_group(cre, s.bound, true, sc);
                add_group(ann, s.bound, true, sa);
                break;
        }
    };
    place(t.w, w_cre, w_ann);
    place(t.v, v_cre, v_ann);
    auto rho_set = v_cre;
    rho_set.insert(rho_set.end(), w_ann.begin(), w_ann.end());
    add_group(rho_set, np.rho, true, 1.0);
    // Whatever is left is only bounded by the unit ball; use the smallest exponent present.
    std::vector<int> rest;
    for (int c = 0; c < M + N; ++c)
        if (owner[c] < 0) rest.push_back(c);
    double s_rest = 1.0;
    for (int c : rest) {
        const bool cre = c < M;
        const KernelComponent& k = cre ? (c < t.m ? t.v : t.w) : (c - M < t.n ? t.w : t.v);
        s_rest = std::min(s_rest, exponent_of(cre ? k.creation : k.annihilation));
    }
    for (int c : rest) add_group({c}, 1.0, false, s_rest);
    return out;
}

inline bool same_layout(const ProposalLayout& a, const ProposalLayout& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].coords != b[i].coords || a[i].prop.bound != b[i].prop.bound ||
            a[i].prop.simplex != b[i].prop.simplex || a[i].prop.shape != b[i].prop.shape)
            return false;
    }
    return true;
}

}  // namespace detail

inline constexpr int mc_product_max_dim = 12;

// (integral |(w * v)_{M,N}|^p / (|k|^lambda |k~|^lambda))^{1/p}; the proposal is an
// equal mixture over the support layouts of the contributing terms.
inline McEstimate product_component_norm(const WickProduct& prod, const NormParams& np, const McOptions& mc = {},
                                         bool symmetrized = false) {
    np.validate();
    if (np.p_infinite()) throw PreconditionError("product_component_norm: finite p required");
    const int M = prod.M(), N = prod.N(), dim = M + N;
    McEstimate zero{0.0, 0.0, mc.samples, mc.seed};
    if (prod.terms().empty()) return zero;
    if (dim == 0) {
        zero.value = std::abs(prod.evaluate({}, {}));
        return zero;
    }
    if (dim > mc_product_max_dim) throw UnsupportedScale("product_component_norm: M + N above 12");
    // Integrability at the origin of every slot.
    auto slot_exp = [&](const RadialFactor& f) { return np.p * f.alpha - np.lambda + np.d; };
    for (const auto& t : prod.terms()) {
        const bool bad = (M - t.m > 0 && slot_exp(t.w.creation) <= 0) || (t.n > 0 && slot_exp(t.w.annihilation) <= 0) ||
                         (t.m > 0 && slot_exp(t.v.creation) <= 0) || (N - t.n > 0 && slot_exp(t.v.annihilation) <= 0);
        if (bad) return {inf, 0.0, mc.samples, mc.seed};
    }
    std::vector<detail::ProposalLayout> layouts;
    for (const auto& t : prod.terms()) {
        auto l = detail::layout_for_term(t, M, N, np);
        if (std::none_of(layouts.begin(), layouts.end(), [&](const auto& x) { return detail::same_layout(x, l); }))
            layouts.push_back(std::move(l));
    }
    const double log_o = log_sphere_area(np.d);
    const double log_pi = -std::log(double(layouts.size()));
    auto log_mix_density = [&](std::span<const double> r) {
        std::vector<double> parts;
        std::array<double, mc_product_max_dim> buf{};
        for (const auto& lay : layouts) {
            double ld = log_pi;
            for (const auto& g : lay) {
                for (std::size_t i = 0; i < g.coords.size(); ++i) buf[i] = r[g.coords[i]];
                ld += g.prop.log_density(std::span<const double>(buf.data(), g.coords.size()));
                if (ld == -inf) break;
            }
            parts.push_back(ld);
        }
        return log_sum_exp(parts);
    };
    auto draw = [&](Rng& rng) {
        std::array<double, mc_product_max_dim> r{}, buf{};
        const auto& lay = layouts[layouts.size() == 1 ? 0 : rng.below(int(layouts.size()))];
        for (const auto& g : lay) {
            g.prop.sample(rng, std::span<double>(buf.data(), g.coords.size()));
            for (std::size_t i = 0; i < g.coords.size(); ++i) r[g.coords[i]] = buf[i];
        }
        std::span<const double> all(r.data(), dim);
        const double val = symmetrized ? prod.evaluate_symmetrized(all.subspan(0, M), all.subspan(M))
                                       : prod.evaluate(all.subspan(0, M), all.subspan(M));
        if (val == 0.0) return 0.0;
        double logf = dim * log_o + np.p * std::log(std::abs(val));
        for (int i = 0; i < dim; ++i) logf += (np.d - 1.0 - np.lambda) * std::log(r[i]);
        return std::exp(logf - log_mix_density(all));
    };
    return root_estimate(monte_carlo(draw, mc), np.p);
}

// ---------------------------------------------------------------------------
// Closed q-series for one-sided factors: w has only (0,n), v only (m,0) components.

struct WickSeriesTerm {
    int q = 0;
    double log_coeff = 0;            // binomials, q!, both coefficients, O^q Gamma(x)^q / Gamma(q x + 1)
    double t_exponent = 0;           // q x
    double creation_alpha = 0;       // profile exponent of v_{M+q,0}
    double annihilation_alpha = 0;   // profile exponent of w_{0,N+q}
    double bound_v = 1;              // simplex bound on sum k from v
    double bound_w = 1;              // simplex bound on sum k~ from w
};

struct WickSeries {
    int M = 0, N = 0;
    int d = 1;
    double rho = 1;
    std::vector<WickSeriesTerm> terms;
    double creation_exponent = nan;      // common value over the terms, NaN when mixed
    double annihilation_exponent = nan;
    int q_truncation = -1;               // last q kept
    double tail_bound = 0;               // bound on the discarded scaled terms
    double tolerance = 0;
    bool divergent = false;
    std::string reason;

    bool empty() const { return terms.empty(); }

    // Largest value t can take, used to scale the terms.
    double t_max() const {
        double t = rho;
        for (const auto& x : terms) t = std::min({t, x.bound_v, x.bound_w});
        return t;
    }
    double log_scaled_term(const WickSeriesTerm& x) const { return x.log_coeff + x.t_exponent * std::log(t_max()); }

    static double coupling(const WickSeriesTerm& x, double rho, double sk, double skt) {
        return std::min({rho - sk - skt, x.bound_v - sk, x.bound_w - skt});
    }

    double term_value(const WickSeriesTerm& x, std::span<const double> k, std::span<const double> kt) const {
        double sk = 0, skt = 0, logv = x.log_coeff;
        for (double r : k) {
            sk += r;
            logv += x.creation_alpha * std::log(r);
        }
        for (double r : kt) {
            skt += r;
            logv += x.annihilation_alpha * std::log(r);
        }
        const double t = coupling(x, rho, sk, skt);
        if (t <= 0) return 0.0;
        if (x.t_exponent != 0) logv += x.t_exponent * std::log(t);
        return std::exp(logv);
    }

    // Partial sum over terms with q <= qmax (all kept terms by default).
    double evaluate(std::span<const double> k, std::span<const double> kt, int qmax = -1) const {
        if (int(k.size()) != M || int(kt.size()) != N) throw PreconditionError("wick series: wrong arity");
        NeumaierSum s;
        for (const auto& x : terms)
            if (qmax < 0 || x.q <= qmax) s.add(term_value(x, k, kt));
        return s.value();
    }

    WickSeries scaled(double c) const {
        if (!(c > 0)) throw PreconditionError("wick series: scale must be positive");
        WickSeries s = *this;
        for (auto& x : s.terms) x.log_coeff += std::log(c);
        s.tail_bound *= c;
        return s;
    }
};

namespace detail {

inline void require_one_sided_slot(const KernelComponent& c, bool creation_side) {
    const RadialFactor& f = creation_side ? c.creation : c.annihilation;
    if (f.singular()) throw UnsupportedFamily("wick series: singular profile in a one-sided factor");
    const auto* s = std::get_if<SimplexJoint>(&c.constraint);
    if (!s) throw UnsupportedFamily("wick series: one-sided factors need a simplex constraint");
}

inline std::optional<WickSeriesTerm> series_term(const KernelSequence& w, const KernelSequence& v, int M, int N,
                                                 int q, const NormParams& np, double log_o) {
    auto wc = w.component(0, N + q);
    auto vc = v.component(M + q, 0);
    if (!wc || !vc) return std::nullopt;
    require_one_sided_slot(*wc, false);
    require_one_sided_slot(*vc, true);
    WickSeriesTerm t;
    t.q = q;
    t.annihilation_alpha = wc->annihilation.alpha;
    t.creation_alpha = vc->creation.alpha;
    t.bound_w = constraint_bound(wc->constraint);
    t.bound_v = constraint_bound(vc->constraint);
    t.log_coeff = log_binomial(M + q, q) + log_binomial(N + q, q) + log_gamma(q + 1.0) + wc->log_coeff + vc->log_coeff;
    if (q > 0) {
        const double x = t.annihilation_alpha + t.creation_alpha + np.d - 1.0;
        if (x <= 0) throw DomainError("contraction exponent <= 0");
        t.log_coeff += q * (log_o + log_gamma(x)) - log_gamma(q * x + 1.0);
        t.t_exponent = q * x;
    }
    return t;
}

}  // namespace detail

inline constexpr int wick_series_max_q = 100000;
inline constexpr double wick_ratio_safety = 10.0;
inline constexpr int wick_divergence_min_q = 32;
inline constexpr int wick_divergence_run = 16;

inline WickSeries wick_component_closed(const KernelSequence& w, const KernelSequence& v, int M, int N,
                                        const NormParams& np, double tol = 1e-15) {
    np.validate_cutoff();
    if (!w.annihilation_only() || !v.creation_only())
        throw UnsupportedFamily("wick series: w must be annihilation-only and v creation-only");
    if (M < 0 || N < 0) throw PreconditionError("wick series: negative index");
    WickSeries s;
    s.M = M;
    s.N = N;
    s.d = np.d;
    s.rho = np.rho;
    s.tolerance = tol;
    const double log_o = log_sphere_area(np.d);
    const bool finite = w.finite() && v.finite();
    const int qcap = finite ? std::max(w.max_index(), v.max_index()) : wick_series_max_q;
    double prev = nan, prev_ratio = nan;
    int rising = 0;
    NeumaierSum partial;
    for (int q = 0; q <= qcap; ++q) {
        std::optional<WickSeriesTerm> t;
        try {
            t = detail::series_term(w, v, M, N, q, np, log_o);
        } catch (const DomainError& e) {
            s.divergent = true;
            s.reason = e.what();
            s.terms.clear();
            return s;
        }
        if (!t) continue;
        s.terms.push_back(*t);
        s.q_truncation = q;
        if (finite) continue;
        const double cur = s.log_scaled_term(*t);
        partial.add(std::exp(cur));
        if (!std::isnan(prev) && q >= 2) {
            // Term ratios above 1 that keep increasing mean super-geometric
            // growth, which no power of t can compensate.
            const double ratio = std::exp(cur - prev);
            rising = ratio >= 1 && ratio > prev_ratio ? rising + 1 : 0;
            prev_ratio = ratio;
            if (q >= wick_divergence_min_q && rising >= wick_divergence_run) {
                s.divergent = true;
                s.reason = "q-series terms grow faster than geometrically";
                s.terms.clear();
                return s;
            }
            const double r = wick_ratio_safety * ratio;
            if (r < 1) {
                const double tail = std::exp(cur) * r / (1 - r);
                if (tail < tol * partial.value()) {
                    s.tail_bound = tail;
                    break;
                }
            }
        }
        prev = cur;
        if (q == qcap) throw DomainError("wick series: no certified truncation below the q cap");
    }
    auto uniform = [&](auto get) {
        if (s.terms.empty()) return nan;
        const double a = get(s.terms.front());
        for (const auto& t : s.terms)
            if (get(t) != a) return nan;
        return a;
    };
    s.creation_exponent = uniform([](const WickSeriesTerm& t) { return t.creation_alpha; });
    s.annihilation_exponent = uniform([](const WickSeriesTerm& t) { return t.annihilation_alpha; });
    return s;
}

// Monte Carlo norm of a series component; p = inf maximizes instead.
inline McEstimate wick_component_norm(const WickSeries& s, const NormParams& np, const McOptions& mc = {}) {
    np.validate();
    const int M = s.M, N = s.N, dim = M + N;
    McEstimate zero{0.0, 0.0, mc.samples, mc.seed};
    if (s.divergent) return {inf, 0.0, mc.samples, mc.seed};
    if (s.terms.empty()) return zero;
    if (dim == 0) {
        zero.value = std::abs(s.evaluate({}, {}));
        return zero;
    }
    if (dim > mc_product_max_dim) throw UnsupportedScale("wick_component_norm: M + N above 12");
    double ac = inf, aa = inf, bv = 0, bw = 0;
    for (const auto& t : s.terms) {
        ac = std::min(ac, t.creation_alpha);
        aa = std::min(aa, t.annihilation_alpha);
        bv = std::max(bv, t.bound_v);
        bw = std::max(bw, t.bound_w);
    }
    bv = std::min(bv, s.rho);
    bw = std::min(bw, s.rho);

    if (np.p_infinite()) {
        // sup of |S| / prod r^lambda over random support points and the corner at the origin
        const SimplexPowerSampler sc{M, bv, 1.0}, sa{N, bw, 1.0};
        std::vector<double> k(M), kt(N);
        auto log_ratio = [&]() {
            const double v = s.evaluate(k, kt);
            if (v <= 0) return -inf;
            double l = std::log(v);
            for (double r : k) l -= np.lambda * std::log(r);
            for (double r : kt) l -= np.lambda * std::log(r);
            return l;
        };
        double best = -inf;
        for (double scale : {1e-12, 1e-9, 1e-6, 1e-3}) {
            std::fill(k.begin(), k.end(), scale * bv / std::max(M, 1));
            std::fill(kt.begin(), kt.end(), scale * bw / std::max(N, 1));
            best = std::max(best, log_ratio());
        }
        Rng rng(mc.seed);
        for (std::uint64_t i = 0; i < mc.samples; ++i) {
            if (sc.draw(rng, k) == -inf || sa.draw(rng, kt) == -inf) continue;
            best = std::max(best, log_ratio());
        }
        return {best == -inf ? 0.0 : std::exp(best), 0.0, mc.samples, mc.seed};
    }

    const double xc = np.p * ac - np.lambda + np.d, xa = np.p * aa - np.lambda + np.d;
    if ((M && xc <= 0) || (N && xa <= 0)) return {inf, 0.0, mc.samples, mc.seed};
    const SimplexPowerSampler sc{M, bv, xc}, sa{N, bw, xa};
    const double log_o = log_sphere_area(np.d);
    auto draw = [&](Rng& rng) {
        std::array<double, mc_product_max_dim> k{}, kt{};
        double logw = sc.draw(rng, std::span<double>(k.data(), M));
        if (logw == -inf) return 0.0;
        const double lw2 = sa.draw(rng, std::span<double>(kt.data(), N));
        if (lw2 == -inf) return 0.0;
        logw += lw2;
        const double v = s.evaluate(std::span<const double>(k.data(), M), std::span<const double>(kt.data(), N));
        if (v == 0.0) return 0.0;
        double logf = logw + dim * log_o + np.p * std::log(std::abs(v));
        for (int i = 0; i < M; ++i) logf += (np.d - np.lambda - xc) * std::log(k[i]);
        for (int j = 0; j < N; ++j) logf += (np.d - np.lambda - xa) * std::log(kt[j]);
        return std::exp(logf);
    };
    return root_estimate(monte_carlo(draw, mc), np.p);
}

// ---------------------------------------------------------------------------
// Epsilon-family bounds.

struct EpsConfig {
    int d = 3;
    double p = 2.0;
    double lambda = 3.5;
    double rho = 1.0;
    double kappa = 1.25;
    WeightFunction D = WeightFunction::geometric(0.5);

    NormParams params() const { return {lambda, p, d, rho}; }
    double threshold() const { return d * (1.0 - p / 2.0) + p / 2.0; }

    void validate() const {
        params().validate_cutoff();
        if (std::isinf(p)) throw DomainError("epsilon family: p must be finite");
        if (lambda < threshold() - 1e-12) throw DomainError("epsilon family: lambda below d(1-p/2)+p/2");
        if (!(kappa > 1 && kappa < 1.5)) throw DomainError("epsilon family: kappa must lie in (1, 3/2)");
    }
};

// log of (M+1) c_{M+1} ((rho/2)^{M eps + X} O^M Gamma(eps)^M Gamma(X+1) / Gamma(M eps + X + 1))^{1/p},
// the per-side factor of the q = 1 bound, with X = 2 lambda - 2d + 2 eps + (d-1) p.
inline double log_q1_side_factor(int M, double eps, const EpsConfig& cfg) {
    const NormParams np = cfg.params();
    const double X = 2 * cfg.lambda - 2 * cfg.d + 2 * eps + (cfg.d - 1) * cfg.p;
    const double half = cfg.rho / 2;
    const double log_c = log_normalized_counterexample_coefficient(M + 1, eps, np, cfg.D, cfg.kappa);
    double log_int = X * std::log(half);
    if (M > 0) log_int = log_simplex_gamma_integral({M, M, half, eps, X}) + M * log_sphere_area(cfg.d);
    return std::log(M + 1.0) + log_c + log_int / cfg.p;
}

inline double log_q1_prefactor(double eps, const EpsConfig& cfg) {
    const double X = 2 * cfg.lambda - 2 * cfg.d + 2 * eps + (cfg.d - 1) * cfg.p;
    return log_sphere_area(cfg.d) + std::log(cfg.p / X);
}

// Lower bound on ||(w(eps) * v(eps))_{M,N}|| from the q = 1 summand alone, eps = 1/a. Log domain.
inline double log_q1_lower_bound_norm(int M, int N, double a, const EpsConfig& cfg) {
    cfg.validate();
    if (M < 0 || N < 0 || !(a > 0)) throw DomainError("q1 bound: need M, N >= 0 and a > 0");
    const double eps = 1.0 / a;
    return log_q1_prefactor(eps, cfg) + log_q1_side_factor(M, eps, cfg) + log_q1_side_factor(N, eps, cfg);
}

inline double q1_lower_bound_norm(int M, int N, double a, const EpsConfig& cfg) {
    return std::exp(log_q1_lower_bound_norm(M, N, a, cfg));
}

// Truncated radial integral over delta <= |x| <= rho/2 of |x|^{(2 lambda - 2d + 2 eps - p)/p},
// eps halfway between lambda and the threshold.
inline double divergence_probe_inner_integral(const NormParams& np, double delta) {
    np.validate();
    if (np.p_infinite()) throw PreconditionError("inner-integral probe: p must be finite");
    const double thr = np.d * (1 - np.p / 2) + np.p / 2;
    if (!(np.lambda < thr)) throw PreconditionError("inner-integral probe: lambda must lie below d(1-p/2)+p/2");
    const double half = np.rho / 2;
    if (!(delta > 0 && delta <= half)) throw PreconditionError("inner-integral probe: need 0 < delta <= rho/2");
    const double eps = (thr - np.lambda) / 2;
    const double e = np.d + (2 * np.lambda - 2 * np.d + 2 * eps - np.p) / np.p;
    return sphere_area(np.d) * (std::pow(delta, e) - std::pow(half, e)) / (-e);
}

inline double inner_integral_exponent(const NormParams& np) {
    const double thr = np.d * (1 - np.p / 2) + np.p / 2;
    const double eps = (thr - np.lambda) / 2;
    return np.d + (2 * np.lambda - 2 * np.d + 2 * eps - np.p) / np.p;
}

// ||w_{M,N}|| ||v_{M,N}|| for box-constrained factors: the single q = 0, m = M, n = N
// summand of the (2M, 2N) product component. Log domain.
inline double log_fastgrowing_component_lower_bound(const KernelSequence& w, const KernelSequence& v, int M, int N,
                                                    const NormParams& np) {
    auto wc = w.component(M, N);
    auto vc = v.component(M, N);
    if (!wc || !vc) return -inf;
    if (!std::holds_alternative<BoxPerCoordinate>(wc->constraint) ||
        !std::holds_alternative<BoxPerCoordinate>(vc->constraint))
        throw UnsupportedFamily("fast-growing bound: components must carry a per-coordinate box");
    const NormResult a = component_norm(*wc, np), b = component_norm(*vc, np);
    if (a.infinite || b.infinite) return inf;
    return a.log_value + b.log_value;
}

inline double fastgrowing_component_lower_bound(const KernelSequence& w, const KernelSequence& v, int M, int N,
                                                const NormParams& np) {
    return std::exp(log_fastgrowing_component_lower_bound(w, v, M, N, np));
}

}  // namespace wicknorm
