#pragma once

#include <array>
#include <cmath>
#include <span>
#include <utility>

#include "core.hpp"
#include "mc.hpp"

namespace wicknorm {

inline double log_beta(double x, double y) {
    if (!(x > 0) || !(y > 0)) throw DomainError("beta: arguments must be positive");
    return log_gamma(x) + log_gamma(y) - log_gamma(x + y);
}

inline double beta(double x, double y) { return std::exp(log_beta(x, y)); }

inline double log_sphere_area(int d) {
    if (d < 1) throw DomainError("sphere_area: dimension must be at least 1");
    return std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) - log_gamma(0.5 * d);
}

// Surface measure of the unit sphere in R^d (two points of weight one for d = 1).
inline double sphere_area(int d) { return std::exp(log_sphere_area(d)); }

// A(M, m, rho, x, y): integral over {s >= 0, sum s <= rho} of
// prod_{i<=M} s_i^{x-1} * (rho - sum_{i<=m} s_i)^y.
struct GammaIntegralParams {
    int M = 1;
    int m = 0;
    double rho = 1.0;
    double x = 1.0;
    double y = 0.0;

    void validate() const {
        if (M < 1) throw DomainError("simplex integral: M must be at least 1");
        if (m < 0 || m > M) throw DomainError("simplex integral: need 0 <= m <= M");
        if (!(rho > 0) || !std::isfinite(rho)) throw DomainError("simplex integral: rho must be positive");
        if (!(x > 0) || !std::isfinite(x)) throw DomainError("simplex integral: x must be positive");
        if (!(y >= 0) || !std::isfinite(y)) throw DomainError("simplex integral: y must be non-negative");
    }
};

inline double log_simplex_gamma_integral(const GammaIntegralParams& p) {
    p.validate();
    const double M = p.M, free = double(p.M - p.m) * p.x;
    return (M * p.x + p.y) * std::log(p.rho) + M * log_gamma(p.x) + log_gamma(free + p.y + 1.0) -
           log_gamma(M * p.x + p.y + 1.0) - log_gamma(free + 1.0);
}

// Overflows to +inf only when the value itself exceeds the double range; use
// the log form for such parameters.
inline double simplex_gamma_integral(const GammaIntegralParams& p) {
    return std::exp(log_simplex_gamma_integral(p));
}

// Integral of prod s_i^{x_i - 1} over {s >= 0, sum s <= bound}.
inline double log_dirichlet_integral(std::span<const double> x, double bound) {
    if (!(bound > 0)) throw DomainError("dirichlet integral: bound must be positive");
    double sx = 0, acc = 0;
    for (double xi : x) {
        if (!(xi > 0)) throw DomainError("dirichlet integral: exponents must be positive");
        sx += xi;
        acc += log_gamma(xi);
    }
    return sx * std::log(bound) + acc - log_gamma(sx + 1.0);
}

inline constexpr int mc_simplex_max_dim = 12;

inline McEstimate simplex_gamma_integral_mc(const GammaIntegralParams& p, std::uint64_t samples,
                                            std::uint64_t seed, unsigned threads = 0) {
    p.validate();
    if (p.M > mc_simplex_max_dim) throw UnsupportedScale("simplex_gamma_integral_mc: M above 12");
    if (samples < 1000) throw PreconditionError("simplex_gamma_integral_mc: need at least 1000 samples");
    const SimplexPowerSampler sampler{p.M, p.rho, p.x};
    auto draw = [&](Rng& rng) {
        std::array<double, mc_simplex_max_dim> s{};
        const double logw = sampler.draw(rng, s);
        if (logw == -inf) return 0.0;
        double partial = 0;
        for (int i = 0; i < p.m; ++i) partial += s[i];
        const double resid = p.rho - partial;
        if (resid <= 0) return 0.0;
        return std::exp(logw + p.y * std::log(resid));
    };
    McOptions opt;
    opt.samples = samples;
    opt.seed = seed;
    opt.threads = threads;
    return monte_carlo(draw, opt);
}

// Both sides of A(M,m,1,x,y) = B(x,(M-1)x+y+1) A(M-1,m-1,1,x,y), evaluated at
// unit radius.
inline std::pair<double, double> recursion_check(const GammaIntegralParams& p) {
    p.validate();
    if (p.m < 1) throw PreconditionError("recursion_check: needs m >= 1");
    if (p.M < 2) throw PreconditionError("recursion_check: needs M >= 2");
    GammaIntegralParams lhs = p, tail = p;
    lhs.rho = 1.0;
    tail.rho = 1.0;
    tail.M -= 1;
    tail.m -= 1;
    const double l = simplex_gamma_integral(lhs);
    const double r = std::exp(log_beta(p.x, (p.M - 1) * p.x + p.y + 1.0) + log_simplex_gamma_integral(tail));
    return {l, r};
}

}  // namespace wicknorm
