#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace wicknorm {

inline constexpr const char* version = "0.3.1";

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Requested problem size exceeds what the sampler or basis can handle.
struct UnsupportedScale : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kernel sequence does not have the shape an operation relies on.
struct UnsupportedFamily : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Compensated (Neumaier) summation.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: argument must be positive and finite");
    return boost::math::lgamma(x);
}

inline double log_sum_exp(double a, double b) {
    if (a == -inf) return b;
    if (b == -inf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double log_sum_exp(const std::vector<double>& xs) {
    double hi = -inf;
    for (double x : xs) hi = std::max(hi, x);
    if (hi == -inf || hi == inf) return hi;
    NeumaierSum s;
    for (double x : xs) s.add(std::exp(x - hi));
    return hi + std::log(s.value());
}

inline bool relative_close(double a, double b, double tol) {
    if (a == b) return true;
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return nan;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : nan;
}

}  // namespace wicknorm
