#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "core.hpp"
#include "counterexamples.hpp"
#include "curves.hpp"
#include "kernels.hpp"
#include "mc.hpp"
#include "norms.hpp"

namespace wicknorm {

inline constexpr int fock_max_cells = 64;
inline constexpr int fock_max_photons = 3;
inline constexpr int fock_max_order = 3;

struct Cell {
    double center = 0;
    double width = 0;
};

// Radial cells partitioning (0, 1] for d = 1; both signs of k share a cell.
class MomentumGrid {
public:
    static constexpr double degeneracy = 2.0;

    explicit MomentumGrid(std::vector<double> edges) : edges_(std::move(edges)) {
        if (edges_.size() < 2 || edges_.front() != 0.0 || edges_.back() != 1.0)
            throw DomainError("momentum grid: edges must run from 0 to 1");
        for (std::size_t i = 1; i < edges_.size(); ++i)
            if (!(edges_[i] > edges_[i - 1])) throw DomainError("momentum grid: edges must increase");
        if (cells() > fock_max_cells) throw UnsupportedScale("momentum grid: too many cells");
    }

    static MomentumGrid uniform(int n) {
        if (n < 1) throw DomainError("momentum grid: need at least one cell");
        std::vector<double> e(n + 1);
        for (int i = 0; i <= n; ++i) e[i] = double(i) / n;
        e.back() = 1.0;
        return MomentumGrid(std::move(e));
    }

    // Uniform coarse cells with an edge at c; the two cells touching c are split
    // geometrically (halving) until the cells at c have width <= h.
    static MomentumGrid refined_toward(double c, int coarse, double h) {
        if (!(c > 0 && c < 1)) throw DomainError("momentum grid: refinement center must lie in (0, 1)");
        if (coarse < 2 || !(h > 0)) throw DomainError("momentum grid: need coarse >= 2 and h > 0");
        std::vector<double> e;
        for (int i = 0; i <= coarse; ++i) e.push_back(double(i) / coarse);
        e.push_back(c);
        const double w0 = 1.0 / coarse;
        const double left = std::max(0.0, std::floor(c / w0) * w0 == c ? c - w0 : std::floor(c / w0) * w0);
        const double right = std::min(1.0, std::ceil(c / w0) * w0 == c ? c + w0 : std::ceil(c / w0) * w0);
        for (double d = (c - left) / 2; d >= h * (1 - 1e-12) && d > 0; d /= 2) e.push_back(c - d);
        for (double d = (right - c) / 2; d >= h * (1 - 1e-12) && d > 0; d /= 2) e.push_back(c + d);
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }), e.end());
        e.front() = 0.0;
        e.back() = 1.0;
        return MomentumGrid(std::move(e));
    }

    int cells() const { return int(edges_.size()) - 1; }
    Cell cell(int i) const { return {(edges_[i] + edges_[i + 1]) / 2, edges_[i + 1] - edges_[i]}; }
    double lower(int i) const { return edges_[i]; }
    double upper(int i) const { return edges_[i + 1]; }
    double measure(int i) const { return degeneracy * cell(i).width; }
    const std::vector<double>& edges() const { return edges_; }

private:
    std::vector<double> edges_;
};

class SparseMatrix {
public:
    struct Entry {
        int row, col;
        double value;
    };

    SparseMatrix(int rows, int cols, std::vector<Entry> entries) : rows_(rows), cols_(cols) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
        for (const auto& e : entries) {
            if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
                throw PreconditionError("sparse matrix: entry out of range");
            if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col)
                entries_.back().value += e.value;
            else
                entries_.push_back(e);
        }
        std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
    }

    static SparseMatrix identity(int n) {
        std::vector<Entry> e;
        for (int i = 0; i < n; ++i) e.push_back({i, i, 1.0});
        return SparseMatrix(n, n, std::move(e));
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nonzeros() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(rows_, 0.0);
        for (const auto& e : entries_) y[e.row] += e.value * x[e.col];
        return y;
    }
    std::vector<double> apply_transpose(const std::vector<double>& x) const {
        std::vector<double> y(cols_, 0.0);
        for (const auto& e : entries_) y[e.col] += e.value * x[e.row];
        return y;
    }
    SparseMatrix transpose() const {
        std::vector<Entry> t;
        for (const auto& e : entries_) t.push_back({e.col, e.row, e.value});
        return SparseMatrix(cols_, rows_, std::move(t));
    }
    std::vector<double> dense() const {
        std::vector<double> d(std::size_t(rows_) * cols_, 0.0);
        for (const auto& e : entries_) d[std::size_t(e.row) * cols_ + e.col] = e.value;
        return d;
    }
    double at(int r, int c) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{r, c}, [](const Entry& e, auto key) {
            return e.row != key.first ? e.row < key.first : e.col < key.second;
        });
        return it != entries_.end() && it->row == r && it->col == c ? it->value : 0.0;
    }

private:
    int rows_, cols_;
    std::vector<Entry> entries_;
};

inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows()) throw PreconditionError("sparse multiply: inner dimensions differ");
    std::vector<std::vector<std::pair<int, double>>> brows(b.rows());
    for (const auto& e : b.entries()) brows[e.row].push_back({e.col, e.value});
    std::vector<SparseMatrix::Entry> out;
    for (const auto& e : a.entries())
        for (auto [c, v] : brows[e.col]) out.push_back({e.row, c, e.value * v});
    return SparseMatrix(a.rows(), b.cols(), std::move(out));
}

// Row-major dense matrix with the same apply interface.
struct DenseMatrix {
    int r = 0, c = 0;
    std::vector<double> data;
    int rows() const { return r; }
    int cols() const { return c; }
    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(r, 0.0);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) y[i] += data[std::size_t(i) * c + j] * x[j];
        return y;
    }
    std::vector<double> apply_transpose(const std::vector<double>& x) const {
        std::vector<double> y(c, 0.0);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) y[j] += data[std::size_t(i) * c + j] * x[i];
        return y;
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    NeumaierSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

inline double euclidean_norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct OperatorNormOptions {
    double tolerance = 1e-10;
    int max_iterations = 20000;
    std::uint64_t seed = 0x0b5;
};

// Largest singular value by power iteration on A^T A, stopped once the
// Rayleigh quotient changes by less than tolerance (relative) between sweeps.
template <class Op>
double operator_norm(const Op& A, const OperatorNormOptions& opt = {}) {
    const int n = A.cols();
    if (n == 0 || A.rows() == 0) return 0.0;
    Rng rng(opt.seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    double nx = euclidean_norm(x);
    for (auto& v : x) v /= nx;
    double lam = 0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        std::vector<double> y = A.apply_transpose(A.apply(x));
        const double next = dot(x, y);
        if (next <= 0) return 0.0;
        const double ny = euclidean_norm(y);
        for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
        const bool done = std::abs(next - lam) <= opt.tolerance * next;
        lam = next;
        if (done) break;
    }
    return std::sqrt(lam);
}

// Occupation-number basis of all states with at most N_ph photons; the reduced
// subspace keeps those with field energy below one.
class DiscreteFock {
public:
    using State = std::vector<int>;  // sorted cell indices, one entry per photon

    DiscreteFock(MomentumGrid grid, int photon_cutoff) : grid_(std::move(grid)), nph_(photon_cutoff) {
        if (photon_cutoff < 0 || photon_cutoff > fock_max_photons)
            throw UnsupportedScale("discrete Fock space: photon cutoff must lie in [0, 3]");
        State s;
        enumerate(s, 0);
        std::sort(states_.begin(), states_.end(), [](const State& a, const State& b) {
            return a.size() != b.size() ? a.size() < b.size() : a < b;
        });
        for (std::size_t i = 0; i < states_.size(); ++i) {
            index_[states_[i]] = int(i);
            double e = 0;
            for (int c : states_[i]) e += grid_.cell(c).center;
            energy_.push_back(e);
            if (e < 1.0) {
                reduced_index_[states_[i]] = int(reduced_.size());
                reduced_.push_back(int(i));
            }
        }
    }

    const MomentumGrid& grid() const { return grid_; }
    int photon_cutoff() const { return nph_; }
    int dimension() const { return int(states_.size()); }
    int reduced_dimension() const { return int(reduced_.size()); }
    const State& state(int i) const { return states_[i]; }
    double field_energy(int i) const { return energy_[i]; }
    int full_of_reduced(int r) const { return reduced_[r]; }
    int index_of(const State& s) const {
        auto it = index_.find(s);
        return it == index_.end() ? -1 : it->second;
    }
    int reduced_index_of(const State& s) const {
        auto it = reduced_index_.find(s);
        return it == reduced_index_.end() ? -1 : it->second;
    }

    SparseMatrix field_energy_matrix() const {
        std::vector<SparseMatrix::Entry> e;
        for (int i = 0; i < dimension(); ++i) e.push_back({i, i, energy_[i]});
        return SparseMatrix(dimension(), dimension(), std::move(e));
    }
    SparseMatrix reduced_projector() const {
        std::vector<SparseMatrix::Entry> e;
        for (int i : reduced_) e.push_back({i, i, 1.0});
        return SparseMatrix(dimension(), dimension(), std::move(e));
    }

private:
    void enumerate(State& s, int from) {
        states_.push_back(s);
        if (int(s.size()) == nph_) return;
        for (int c = from; c < grid_.cells(); ++c) {
            s.push_back(c);
            enumerate(s, c);
            s.pop_back();
        }
    }

    MomentumGrid grid_;
    int nph_;
    std::vector<State> states_;
    std::map<State, int> index_;
    std::map<State, int> reduced_index_;
    std::vector<double> energy_;
    std::vector<int> reduced_;
};

namespace detail {

inline int occupation(const DiscreteFock::State& s, int cell) { return int(std::count(s.begin(), s.end(), cell)); }

inline void remove_one(DiscreteFock::State& s, int cell) { s.erase(std::find(s.begin(), s.end(), cell)); }

inline void add_one(DiscreteFock::State& s, int cell) { s.insert(std::upper_bound(s.begin(), s.end(), cell), cell); }

}  // namespace detail

// Matrix of a_i (or a*_i) on the full truncated basis, [a_i, a*_j] = delta_ij / mu_i below the cutoff.
inline SparseMatrix ladder_matrix(const DiscreteFock& f, int cell, bool creation) {
    if (cell < 0 || cell >= f.grid().cells()) throw PreconditionError("ladder matrix: cell out of range");
    const double scale = 1.0 / std::sqrt(f.grid().measure(cell));
    std::vector<SparseMatrix::Entry> e;
    for (int col = 0; col < f.dimension(); ++col) {
        DiscreteFock::State s = f.state(col);
        const int occ = detail::occupation(s, cell);
        if (creation) {
            if (int(s.size()) == f.photon_cutoff()) continue;
            detail::add_one(s, cell);
            e.push_back({f.index_of(s), col, scale * std::sqrt(occ + 1.0)});
        } else {
            if (occ == 0) continue;
            detail::remove_one(s, cell);
            e.push_back({f.index_of(s), col, scale * std::sqrt(double(occ))});
        }
    }
    return SparseMatrix(f.dimension(), f.dimension(), std::move(e));
}

// P_red W_{m,n}[w] P_red on the reduced basis: sum over cell tuples of
// prod mu / prod sqrt(r) * w(r_i; r_j) a*_{i_1}..a*_{i_m} a_{j_1}..a_{j_n}.
inline SparseMatrix build_interaction_matrix(const DiscreteFock& f, const KernelComponent& k) {
    if (k.m + k.n > fock_max_order) throw UnsupportedScale("interaction matrix: m + n above 3");
    if (k.dimension != 1) throw UnsupportedScale("interaction matrix: only d = 1 grids");
    const MomentumGrid& g = f.grid();
    const int R = f.reduced_dimension();
    std::vector<double> site(g.cells());  // sqrt(mu) / sqrt(r) per cell, in the b = sqrt(mu) a normalization
    for (int i = 0; i < g.cells(); ++i) site[i] = std::sqrt(g.measure(i) / g.cell(i).center);
    std::vector<SparseMatrix::Entry> entries;
    std::vector<double> kr(k.m), ka(k.n);
    for (int col = 0; col < R; ++col) {
        const DiscreteFock::State start = f.state(f.full_of_reduced(col));
        // annihilate an ordered tuple, then create one
        auto create = [&](auto&& self, DiscreteFock::State& s, int depth, double amp, double energy) -> void {
            if (depth == k.m) {
                const int row = f.reduced_index_of(s);
                if (row < 0) return;
                const double w = evaluate_kernel(k, kr, ka);
                if (w != 0.0) entries.push_back({row, col, amp * w});
                return;
            }
            if (int(s.size()) >= f.photon_cutoff()) return;
            for (int c = 0; c < g.cells(); ++c) {
                const double r = g.cell(c).center;
                if (energy + r >= 1.0) break;
                const int occ = detail::occupation(s, c);
                detail::add_one(s, c);
                kr[depth] = r;
                self(self, s, depth + 1, amp * site[c] * std::sqrt(occ + 1.0), energy + r);
                detail::remove_one(s, c);
            }
        };
        auto annihilate = [&](auto&& self, DiscreteFock::State& s, int depth, double amp) -> void {
            if (depth == k.n) {
                double e = 0;
                for (int c : s) e += g.cell(c).center;
                create(create, s, 0, amp, e);
                return;
            }
            std::vector<int> cells(s.begin(), s.end());
            cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
            for (int c : cells) {
                const int occ = detail::occupation(s, c);
                detail::remove_one(s, c);
                ka[depth] = g.cell(c).center;
                self(self, s, depth + 1, amp * site[c] * std::sqrt(double(occ)));
                detail::add_one(s, c);
            }
        };
        DiscreteFock::State s = start;
        annihilate(annihilate, s, 0, 1.0);
    }
    return SparseMatrix(R, R, std::move(entries));
}

// ||W_{m,n}[w]||_op <= ||w||_{3+2mu,2} / sqrt(m^m n^n)
inline BoundCertificate opnorm_bound_check(const DiscreteFock& f, const KernelComponent& k, double mu,
                                           const OperatorNormOptions& opt = {}) {
    if (k.m + k.n < 1) throw PreconditionError("opnorm bound: need m + n >= 1");
    if (!(mu > 0)) throw DomainError("opnorm bound: mu must be positive");
    const NormParams np{3 + 2 * mu, 2.0, 1, 1.0};
    BoundCertificate c;
    c.label = "(" + std::to_string(k.m) + "," + std::to_string(k.n) + ") cells=" + std::to_string(f.grid().cells());
    const NormResult nr = component_norm(k, np);
    if (nr.infinite) throw UnsupportedFamily("opnorm bound: kernel norm is infinite");
    c.lhs = operator_norm(build_interaction_matrix(f, k), opt);
    c.rhs = nr.value() / std::sqrt(std::pow(double(k.m), k.m) * std::pow(double(k.n), k.n));
    c.settle();
    return c;
}

// Discretized ||w||_{lambda,p} of the (1,1) p<2 kernel: exact cell integrals of
// |c - r|^{-p beta}, remaining r-power at the cell midpoint.
inline double discretized_p_lt2_norm(const PLt2Family& fam, const MomentumGrid& g) {
    const NormParams& np = fam.np;
    const double c = np.rho / 2, b = np.p * fam.w.creation.beta;
    const double e = np.p * fam.w.creation.alpha - np.lambda + np.d - 1;
    auto prim = [&](double r) {  // antiderivative of |c - r|^{-b}
        const double t = std::pow(std::abs(c - r), 1 - b) / (1 - b);
        return r < c ? -t : t;
    };
    double side = 0;
    for (int i = 0; i < g.cells(); ++i) {
        const double lo = g.lower(i), hi = std::min(g.upper(i), np.rho);
        if (lo >= hi) continue;
        side += std::pow(g.cell(i).center, e) * (prim(hi) - prim(lo));
    }
    side *= sphere_area(np.d);
    return std::pow(side * side, 1 / np.p);
}

// <psi, W psi> / |psi|^2 for the (1,1) kernel of the p<2 family on a grid resolved to width h at rho/2.
inline double p_lt2_rayleigh_quotient(const PLt2Family& fam, const MomentumGrid& g) {
    const DiscreteFock f(g, 1);
    const SparseMatrix W = build_interaction_matrix(f, fam.w);
    std::vector<double> psi(f.reduced_dimension(), 0.0);
    for (int r = 0; r < f.reduced_dimension(); ++r) {
        const auto& s = f.state(f.full_of_reduced(r));
        if (s.size() != 1) continue;
        const double k = g.cell(s[0]).center;
        psi[r] = std::sqrt(g.measure(s[0])) * evaluate_kernel(fam.psi_m, std::vector<double>{k}, {});
    }
    return dot(psi, W.apply(psi)) / dot(psi, psi);
}

inline std::vector<double> default_shell_widths() { return {1.0 / 8, 1.0 / 80, 1.0 / 800}; }

// Rayleigh-quotient lower bounds on ||W_{1,1}|| as the grid resolves the singular sphere.
inline DivergenceCurve unboundedness_exhibit(double p, NormParams np, const std::vector<double>& shell_widths,
                                             int coarse_cells = 8) {
    if (!(p < 2)) throw PreconditionError("unboundedness exhibit: p must be below 2");
    if (np.d != 1) throw UnsupportedScale("unboundedness exhibit: only d = 1 grids");
    const PLt2Family fam = build_p_lt2_family(p, np, 1, 1);
    DivergenceCurve cur;
    cur.parameter_name = "shell_width";
    cur.value_name = "rayleigh_quotient";
    cur.aux_name = "kernel_norm";
    cur.scale = SlopeScale::None;
    cur.required_growth = 10.0;
    cur.aux_tolerance = 0.05;
    for (double h : shell_widths) {
        const MomentumGrid g = MomentumGrid::refined_toward(fam.np.rho / 2, coarse_cells, h);
        cur.points.push_back({h, std::log(p_lt2_rayleigh_quotient(fam, g)), discretized_p_lt2_norm(fam, g)});
    }
    cur.finalize();
    return cur;
}

// Coordinate text: "rows cols nonzeros" then one "row col value" line per entry, 0-based.
inline void write_coordinate(std::ostream& os, const SparseMatrix& A) {
    os << A.rows() << ' ' << A.cols() << ' ' << A.nonzeros() << '\n';
    os.precision(17);
    for (const auto& e : A.entries()) os << e.row << ' ' << e.col << ' ' << e.value << '\n';
}

}  // namespace wicknorm
