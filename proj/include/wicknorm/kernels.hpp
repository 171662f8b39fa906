#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "core.hpp"

namespace wicknorm {

inline constexpr int max_kernel_index = 1000000;

// r^alpha |c - r|^{-beta}
struct RadialFactor {
    double alpha = 0.0;
    double beta = 0.0;
    double singular_center = 0.0;

    double log_at(double r) const {
        double v = alpha == 0.0 ? 0.0 : alpha * std::log(r);
        if (beta != 0.0) v -= beta * std::log(std::abs(singular_center - r));
        return v;
    }
    double operator()(double r) const {
        double v = alpha == 0.0 ? 1.0 : std::pow(r, alpha);
        if (beta != 0.0) {
            const double gap = std::abs(singular_center - r);
            if (gap == 0.0) return inf;
            v *= std::pow(gap, -beta);
        }
        return v;
    }
    bool singular() const { return beta > 0.0; }
};

enum class SimplexScope { Creation, Annihilation, Joint, Each };

// sum of the radii in scope <= bound; Each applies the bound to both sides separately.
struct SimplexJoint {
    double bound = 1.0;
    SimplexScope scope = SimplexScope::Joint;
};

struct BoxPerCoordinate {
    double bound = 1.0;
};

using SupportConstraint = std::variant<SimplexJoint, BoxPerCoordinate>;

inline double constraint_bound(const SupportConstraint& c) {
    return std::visit([](const auto& v) { return v.bound; }, c);
}

// Whether the constraint puts the creation (annihilation) radii in a simplex.
inline bool creation_in_simplex(const SupportConstraint& c) {
    const auto* s = std::get_if<SimplexJoint>(&c);
    return s && s->scope != SimplexScope::Annihilation;
}
inline bool annihilation_in_simplex(const SupportConstraint& c) {
    const auto* s = std::get_if<SimplexJoint>(&c);
    return s && s->scope != SimplexScope::Creation;
}

struct KernelComponent {
    int m = 0;
    int n = 0;
    double log_coeff = 0.0;
    RadialFactor creation;
    RadialFactor annihilation;
    SupportConstraint constraint = SimplexJoint{};
    int dimension = 1;

    double coeff() const { return std::exp(log_coeff); }

    void validate() const {
        if (m < 0 || n < 0 || m > max_kernel_index || n > max_kernel_index)
            throw DomainError("kernel component: index out of range");
        if (dimension < 1) throw DomainError("kernel component: dimension must be positive");
        if (std::isnan(log_coeff) || log_coeff == inf)
            throw DomainError("kernel component: coefficient must be finite and positive");
        for (const RadialFactor* f : {&creation, &annihilation}) {
            if (!(f->beta >= 0) || !std::isfinite(f->alpha) || !(f->singular_center >= 0))
                throw DomainError("kernel component: invalid radial factor");
        }
        const double b = constraint_bound(constraint);
        if (!(b > 0 && b <= 1)) throw DomainError("kernel component: support bound must lie in (0, 1]");
    }

    bool monomial() const { return creation.beta == 0.0 && annihilation.beta == 0.0; }

    bool in_support(std::span<const double> k, std::span<const double> kt) const {
        if (const auto* box = std::get_if<BoxPerCoordinate>(&constraint)) {
            for (double r : k)
                if (r > box->bound) return false;
            for (double r : kt)
                if (r > box->bound) return false;
            return true;
        }
        const auto& s = std::get<SimplexJoint>(constraint);
        double sc = 0, sa = 0;
        for (double r : k) sc += r;
        for (double r : kt) sa += r;
        switch (s.scope) {
            case SimplexScope::Creation: return sc <= s.bound;
            case SimplexScope::Annihilation: return sa <= s.bound;
            case SimplexScope::Joint: return sc + sa <= s.bound;
            case SimplexScope::Each: return sc <= s.bound && sa <= s.bound;
        }
        return false;
    }
};

inline KernelComponent mirror(const KernelComponent& k) {
    KernelComponent r = k;
    std::swap(r.m, r.n);
    std::swap(r.creation, r.annihilation);
    if (auto* s = std::get_if<SimplexJoint>(&r.constraint)) {
        if (s->scope == SimplexScope::Creation)
            s->scope = SimplexScope::Annihilation;
        else if (s->scope == SimplexScope::Annihilation)
            s->scope = SimplexScope::Creation;
    }
    return r;
}

inline double evaluate_kernel(const KernelComponent& k, std::span<const double> creation_radii,
                              std::span<const double> annihilation_radii) {
    if (int(creation_radii.size()) != k.m || int(annihilation_radii.size()) != k.n)
        throw PreconditionError("evaluate_kernel: radius list lengths must equal (m, n)");
    for (auto radii : {creation_radii, annihilation_radii})
        for (double r : radii)
            if (!(r >= 0 && r <= 1)) throw PreconditionError("evaluate_kernel: radii must lie in [0, 1]");
    if (k.m + k.n == 0) return k.coeff();
    if (!k.in_support(creation_radii, annihilation_radii)) return 0.0;
    double v = k.coeff();
    for (double r : creation_radii) v *= k.creation(r);
    for (double r : annihilation_radii) v *= k.annihilation(r);
    return v;
}

// Terms D(m)D(n)||w_{m,n}|| of a family are bounded by scale * m^{-kappa}
// (rank 1, one-sided families) or scale * (m n)^{-kappa} (rank 2).
struct TailModel {
    double scale = 1.0;
    double kappa = 2.0;
    int rank = 1;
};

enum class SupportPattern { Explicit, AnnihilationRow, CreationColumn, Grid };

class KernelSequence {
public:
    using Generator = std::function<KernelComponent(int, int)>;

    KernelSequence() = default;

    static KernelSequence generated(SupportPattern pattern, Generator gen, std::optional<TailModel> tail,
                                    int first_index = 1) {
        if (pattern == SupportPattern::Explicit) throw PreconditionError("generated sequence needs a pattern");
        KernelSequence s;
        s.pattern_ = pattern;
        s.gen_ = std::move(gen);
        s.tail_ = tail;
        s.first_ = first_index;
        return s;
    }

    void insert(const KernelComponent& c) {
        if (pattern_ != SupportPattern::Explicit) throw PreconditionError("cannot insert into a generated family");
        c.validate();
        if (!comps_.emplace(std::pair{c.m, c.n}, c).second)
            throw PreconditionError("kernel sequence: duplicate component index");
    }

    std::optional<KernelComponent> component(int m, int n) const {
        if (m < 0 || n < 0) return std::nullopt;
        switch (pattern_) {
            case SupportPattern::Explicit: {
                auto it = comps_.find({m, n});
                if (it == comps_.end()) return std::nullopt;
                return it->second;
            }
            case SupportPattern::AnnihilationRow:
                if (m != 0 || n < first_ || n > max_kernel_index) return std::nullopt;
                break;
            case SupportPattern::CreationColumn:
                if (n != 0 || m < first_ || m > max_kernel_index) return std::nullopt;
                break;
            case SupportPattern::Grid:
                if (m < first_ || n < first_ || m > max_kernel_index || n > max_kernel_index) return std::nullopt;
                break;
        }
        KernelComponent c = gen_(m, n);
        c.m = m;
        c.n = n;
        return c;
    }

    // Populated indices with m, n <= max_index in ascending (m+n, m) order.
    std::vector<std::pair<int, int>> indices(int max_index) const {
        std::vector<std::pair<int, int>> out;
        switch (pattern_) {
            case SupportPattern::Explicit:
                for (const auto& [key, c] : comps_)
                    if (key.first <= max_index && key.second <= max_index) out.push_back(key);
                break;
            case SupportPattern::AnnihilationRow:
                for (int n = first_; n <= max_index; ++n) out.push_back({0, n});
                break;
            case SupportPattern::CreationColumn:
                for (int m = first_; m <= max_index; ++m) out.push_back({m, 0});
                break;
            case SupportPattern::Grid:
                for (int m = first_; m <= max_index; ++m)
                    for (int n = first_; n <= max_index; ++n) out.push_back({m, n});
                break;
        }
        std::sort(out.begin(), out.end(), [](auto a, auto b) {
            return a.first + a.second != b.first + b.second ? a.first + a.second < b.first + b.second
                                                            : a.first < b.first;
        });
        return out;
    }

    bool finite() const { return pattern_ == SupportPattern::Explicit; }
    bool empty() const { return finite() && comps_.empty(); }
    SupportPattern pattern() const { return pattern_; }
    const std::optional<TailModel>& tail() const { return tail_; }
    int first_index() const { return first_; }

    int max_index() const {
        if (!finite()) return max_kernel_index;
        int k = 0;
        for (const auto& [key, c] : comps_) k = std::max({k, key.first, key.second});
        return k;
    }

    bool annihilation_only() const {
        if (pattern_ == SupportPattern::AnnihilationRow) return true;
        if (pattern_ != SupportPattern::Explicit) return false;
        return std::all_of(comps_.begin(), comps_.end(), [](const auto& kv) { return kv.first.first == 0; });
    }
    bool creation_only() const {
        if (pattern_ == SupportPattern::CreationColumn) return true;
        if (pattern_ != SupportPattern::Explicit) return false;
        return std::all_of(comps_.begin(), comps_.end(), [](const auto& kv) { return kv.first.second == 0; });
    }

    const std::map<std::pair<int, int>, KernelComponent>& explicit_components() const { return comps_; }

    // Explicit copy of the populated components with indices <= max_index.
    KernelSequence materialize(int max_index) const {
        KernelSequence s;
        for (auto [m, n] : indices(max_index)) s.insert(*component(m, n));
        return s;
    }

private:
    SupportPattern pattern_ = SupportPattern::Explicit;
    std::map<std::pair<int, int>, KernelComponent> comps_;
    Generator gen_;
    std::optional<TailModel> tail_;
    int first_ = 1;
};

class WeightFunction {
public:
    enum class Kind { Geometric, Factorial, Power, Constant, Tabulated };

    static WeightFunction geometric(double xi) {
        if (!(xi > 0 && xi < 1)) throw DomainError("geometric weight: xi must lie in (0, 1)");
        return WeightFunction(Kind::Geometric, xi, {});
    }
    static WeightFunction factorial() { return WeightFunction(Kind::Factorial, 0, {}); }
    static WeightFunction power(double gamma) {
        if (!std::isfinite(gamma)) throw DomainError("power weight: gamma must be finite");
        return WeightFunction(Kind::Power, gamma, {});
    }
    static WeightFunction constant() { return WeightFunction(Kind::Constant, 0, {}); }
    static WeightFunction tabulated(std::vector<double> values) {
        if (values.empty()) throw DomainError("tabulated weight: empty table");
        for (double v : values)
            if (!(v > 0) || !std::isfinite(v)) throw DomainError("tabulated weight: values must be positive");
        return WeightFunction(Kind::Tabulated, 0, std::move(values));
    }

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }
    const std::vector<double>& table() const { return table_; }

    double log_value(int M) const {
        if (M < 0) throw DomainError("weight: negative index");
        switch (kind_) {
            case Kind::Geometric: return -double(M) * std::log(param_);
            case Kind::Factorial: return log_gamma(M + 1.0);
            case Kind::Power: return param_ * std::log(M + 1.0);
            case Kind::Constant: return 0.0;
            case Kind::Tabulated:
                if (std::size_t(M) >= table_.size()) throw std::out_of_range("weight: index beyond table");
                return std::log(table_[M]);
        }
        return nan;
    }
    double value(int M) const { return std::exp(log_value(M)); }

    // log(D(M)/D(M+1))
    double log_ratio(int M) const {
        if (M < 0) throw DomainError("weight: negative index");
        switch (kind_) {
            case Kind::Geometric: return std::log(param_);
            case Kind::Factorial: return -std::log(M + 1.0);
            case Kind::Power: return param_ * (std::log(M + 1.0) - std::log(M + 2.0));
            case Kind::Constant: return 0.0;
            case Kind::Tabulated: return log_value(M) - log_value(M + 1);
        }
        return nan;
    }
    double ratio(int M) const {
        switch (kind_) {
            case Kind::Geometric: return param_;
            case Kind::Factorial: return 1.0 / (M + 1.0);
            case Kind::Constant: return 1.0;
            default: return std::exp(log_ratio(M));
        }
    }

    // sup_{M' >= M} D(M')/D(M'+1), when known in closed form.
    std::optional<double> ratio_sup_from(int M) const {
        switch (kind_) {
            case Kind::Geometric: return param_;
            case Kind::Factorial: return 1.0 / (M + 1.0);
            case Kind::Power: return param_ >= 0 ? 1.0 : ratio(M);
            case Kind::Constant: return 1.0;
            case Kind::Tabulated: return std::nullopt;
        }
        return std::nullopt;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::Geometric: return "geometric:" + std::to_string(param_);
            case Kind::Factorial: return "factorial";
            case Kind::Power: return "power:" + std::to_string(param_);
            case Kind::Constant: return "constant";
            case Kind::Tabulated: return "tabulated:" + std::to_string(table_.size());
        }
        return "?";
    }

private:
    WeightFunction(Kind k, double p, std::vector<double> t) : kind_(k), param_(p), table_(std::move(t)) {}
    Kind kind_;
    double param_;
    std::vector<double> table_;
};

enum class RatioClass { SlowRatio, FastRatio, Neither, Undecidable };

inline const char* to_string(RatioClass c) {
    switch (c) {
        case RatioClass::SlowRatio: return "SlowRatio";
        case RatioClass::FastRatio: return "FastRatio";
        case RatioClass::Neither: return "Neither";
        case RatioClass::Undecidable: return "Undecidable";
    }
    return "?";
}

struct WeightClass {
    RatioClass cls = RatioClass::Undecidable;
    std::optional<double> liminf_ratio;
    std::optional<double> limit;
};

inline constexpr std::size_t min_table_for_classification = 9;

// Tabulated weights: the second half of the ratio sequence is inspected.
// Non-increasing and falling below a quarter of its start reads as ratio -> 0;
// staying within a factor four reads as bounded away from zero.
inline WeightClass classify_weight(const WeightFunction& D) {
    using K = WeightFunction::Kind;
    switch (D.kind()) {
        case K::Geometric: return {RatioClass::SlowRatio, D.parameter(), D.parameter()};
        case K::Power: return {RatioClass::SlowRatio, 1.0, 1.0};
        case K::Constant: return {RatioClass::SlowRatio, 1.0, 1.0};
        case K::Factorial: return {RatioClass::FastRatio, 0.0, 0.0};
        case K::Tabulated: break;
    }
    const auto& t = D.table();
    if (t.size() < min_table_for_classification) return {RatioClass::Undecidable, std::nullopt, std::nullopt};
    std::vector<double> ratios;
    for (std::size_t M = (t.size() - 1) / 2; M + 1 < t.size(); ++M) ratios.push_back(D.ratio(int(M)));
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    // A falling tail that has dropped well below the initial ratio; comparing
    // within the tail alone misses 1/M-type decay, which only halves there.
    const bool falling = std::is_sorted(ratios.rbegin(), ratios.rend()) && ratios.back() < ratios.front();
    if (falling && ratios.back() <= 0.25 * D.ratio(0)) return {RatioClass::FastRatio, 0.0, 0.0};
    if (lo >= 0.25 * hi) return {RatioClass::SlowRatio, lo, std::nullopt};
    return {RatioClass::Neither, std::nullopt, std::nullopt};
}

struct NormParams {
    double lambda = 0.0;
    double p = 2.0;
    int d = 1;
    double rho = 1.0;

    bool p_infinite() const { return std::isinf(p); }

    void validate() const {
        if (!(p >= 1)) throw DomainError("norm parameters: p must be at least 1");
        if (!std::isfinite(lambda)) throw DomainError("norm parameters: lambda must be finite");
        if (d < 1) throw DomainError("norm parameters: d must be positive");
        if (!(rho > 0) || !std::isfinite(rho)) throw DomainError("norm parameters: rho must be positive");
    }
    // The product cutoff must keep all momenta inside the unit ball.
    void validate_cutoff() const {
        validate();
        if (rho > 1) throw DomainError("norm parameters: rho must lie in (0, 1]");
    }
};

}  // namespace wicknorm
