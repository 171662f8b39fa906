#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "core.hpp"

namespace wicknorm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on the open interval (0, 1).
    double uniform() { return (double(eng_() >> 11) + 0.5) * 0x1.0p-53; }
    double exponential() { return -std::log(uniform()); }
    std::uint64_t bits() { return eng_(); }
    int below(int n) { return int(bits() % std::uint64_t(n)); }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal() {
        // Box-Muller, one value per call.
        return std::sqrt(-2.0 * std::log(uniform())) * std::cos(2.0 * std::numbers::pi * uniform());
    }

    // Marsaglia-Tsang; shapes below one use G(a) = G(a+1) U^{1/a}.
    double gamma(double shape) {
        if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double z, v;
            do {
                z = normal();
                v = 1.0 + c * z;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
        }
    }

private:
    std::mt19937_64 eng_;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

struct McOptions {
    std::uint64_t samples = 200000;
    std::uint64_t seed = 0x5eedULL;
    std::uint64_t chunk = 1 << 14;
    unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

struct Moments {
    double n = 0, mean = 0, m2 = 0;

    void push(double x) {
        n += 1;
        const double delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double tot = n + o.n;
        const double delta = o.mean - mean;
        mean += delta * o.n / tot;
        m2 += o.m2 + delta * delta * n * o.n / tot;
        n = tot;
    }
};

}  // namespace detail

// Runs draw(Rng&) -> double over the sample budget. Chunks are seeded from
// (seed, chunk index) and merged in index order, so the result does not depend
// on the number of threads.
template <class Draw>
McEstimate monte_carlo(const Draw& draw, const McOptions& opt) {
    const std::uint64_t chunk = std::max<std::uint64_t>(opt.chunk, 1);
    const std::uint64_t nchunks = (opt.samples + chunk - 1) / chunk;
    std::vector<detail::Moments> parts(nchunks);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t c; (c = next.fetch_add(1)) < nchunks;) {
            Rng rng(stream_seed(opt.seed, c));
            const std::uint64_t count = std::min(chunk, opt.samples - c * chunk);
            detail::Moments mom;
            for (std::uint64_t i = 0; i < count; ++i) mom.push(draw(rng));
            parts[c] = mom;
        }
    };
    unsigned nt = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = unsigned(std::min<std::uint64_t>(nt, nchunks));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    }
    detail::Moments total;
    for (const auto& p : parts) total.merge(p);
    McEstimate est;
    est.value = total.mean;
    est.std_error = total.n > 1 ? std::sqrt(total.m2 / (total.n - 1) / total.n) : 0.0;
    est.samples = opt.samples;
    est.seed = opt.seed;
    return est;
}

// Delta-method transform of an estimate of I into an estimate of I^{1/p}.
inline McEstimate root_estimate(const McEstimate& e, double p) {
    McEstimate r = e;
    if (e.value <= 0) {
        r.value = 0;
        r.std_error = p == 1 ? e.std_error : 0.0;
        return r;
    }
    r.value = std::pow(e.value, 1.0 / p);
    r.std_error = r.value / p * e.std_error / e.value;
    return r;
}

// Points of {r >= 0, sum r <= bound} with log-weights such that
// E[exp(logw) f(r)] = integral of prod r_i^{s-1} f(r) over the simplex.
// s <= 1: per-coordinate power transform plus rejection; s > 1: uniform
// simplex points reweighted by prod r_i^{s-1}.
struct SimplexPowerSampler {
    int n = 0;
    double bound = 1.0;
    double s = 1.0;

    double draw(Rng& rng, std::span<double> out) const {
        if (n == 0) return 0.0;
        if (s <= 1.0) {
            double sum = 0;
            for (int i = 0; i < n; ++i) {
                out[i] = bound * std::pow(rng.uniform(), 1.0 / s);
                sum += out[i];
            }
            if (sum > bound) return -inf;
            return n * (s * std::log(bound) - std::log(s));
        }
        double tot = rng.exponential();
        for (int i = 0; i < n; ++i) {
            out[i] = rng.exponential();
            tot += out[i];
        }
        double logw = n * std::log(bound) - log_gamma(n + 1.0);
        for (int i = 0; i < n; ++i) {
            out[i] = bound * out[i] / tot;
            logw += (s - 1.0) * std::log(out[i]);
        }
        return logw;
    }
};

// Normalized proposal on a simplex (Dirichlet(shape,...,shape,1) scaled by the
// bound) or on a box [0,bound]^n with density prop. to r^{shape-1}.
struct GroupProposal {
    int n = 0;
    double bound = 1.0;
    double shape = 1.0;
    bool simplex = true;

    void sample(Rng& rng, std::span<double> out) const {
        if (n == 0) return;
        if (!simplex) {
            for (int i = 0; i < n; ++i) out[i] = bound * std::pow(rng.uniform(), 1.0 / shape);
            return;
        }
        double tot = rng.exponential();
        for (int i = 0; i < n; ++i) {
            out[i] = shape == 1.0 ? rng.exponential() : rng.gamma(shape);
            tot += out[i];
        }
        for (int i = 0; i < n; ++i) out[i] = bound * out[i] / tot;
    }

    double log_density(std::span<const double> r) const {
        if (n == 0) return 0.0;
        double sum = 0, logs = 0;
        for (int i = 0; i < n; ++i) {
            if (r[i] <= 0 || r[i] > bound) return -inf;
            sum += r[i];
            logs += std::log(r[i]);
        }
        if (!simplex) return n * (std::log(shape) - shape * std::log(bound)) + (shape - 1) * logs;
        if (sum > bound) return -inf;
        return log_gamma(n * shape + 1.0) - n * log_gamma(shape) - n * shape * std::log(bound) +
               (shape - 1) * logs;
    }
};

}  // namespace wicknorm
