// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "wicknorm/bounds.hpp"
#include "wicknorm/counterexamples.hpp"
#include "wicknorm/fock.hpp"
#include "wicknorm/specfun.hpp"

using namespace wicknorm;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GammaIntegralParams random_gamma(Rng& rng, int M) {
    GammaIntegralParams p;
    p.M = M;
    p.m = int(rng.below(M + 1));
    p.rho = rng.uniform(0.2, 1.5);
    p.x = rng.uniform(0.3, 3.0);
    p.y = rng.uniform(0.0, 3.0);
    return p;
}

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void gamma_identity(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst_z = 0, worst_exact = 0;
    for (int i = 0; i < 20; ++i) {
        const GammaIntegralParams p = random_gamma(rng, 1 + int(rng.below(5)));
        const double closed = simplex_gamma_integral(p);
        const McEstimate e = simplex_gamma_integral_mc(p, 1000000, stream_seed(101, i));
        worst_z = std::max(worst_z, std::abs(closed - e.value) / e.std_error);

        GammaIntegralParams unit = p;
        unit.rho = 1;
        worst_exact = std::max(worst_exact, rel(closed, std::pow(p.rho, p.M * p.x + p.y) * simplex_gamma_integral(unit)));

        // m = M: rho^(Mx+y) Gamma(x)^M Gamma(y+1) / Gamma(Mx+y+1)
        GammaIntegralParams full = p;
        full.m = p.M;
        const double full_ref = std::exp((p.M * p.x + p.y) * std::log(p.rho) + p.M * std::lgamma(p.x) +
                                         std::lgamma(p.y + 1) - std::lgamma(p.M * p.x + p.y + 1));
        worst_exact = std::max(worst_exact, rel(simplex_gamma_integral(full), full_ref));

        // m = 0: rho^y times the Dirichlet volume rho^(Mx) Gamma(x)^M / Gamma(Mx+1)
        GammaIntegralParams none = p;
        none.m = 0;
        const double none_ref = std::exp((p.M * p.x + p.y) * std::log(p.rho) + p.M * std::lgamma(p.x) -
                                         std::lgamma(p.M * p.x + 1));
        worst_exact = std::max(worst_exact, rel(simplex_gamma_integral(none), none_ref));
    }
    const double secs = seconds_since(t0);
    o.detail << "max |z| " << worst_z << ", max exact rel " << worst_exact << ", " << secs << " s";
    o.require(worst_z <= 4, "MC within 4 sigma");
    o.require(worst_exact <= 1e-12, "scaling and special cases to 1e-12");
    o.require(secs < 120, "runtime < 2 min");
}

void recursion(Outcome& o) {
    Rng rng(202);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        GammaIntegralParams p = random_gamma(rng, 2 + int(rng.below(7)));
        p.rho = 1;
        if (p.m == 0) p.m = 1;
        GammaIntegralParams lower = p;
        lower.M = p.M - 1;
        lower.m = p.m - 1;
        const double rhs = std::exp(lbeta(p.x, (p.M - 1) * p.x + p.y + 1)) * simplex_gamma_integral(lower);
        worst = std::max(worst, rel(simplex_gamma_integral(p), rhs));
    }
    o.detail << "max rel " << worst << " over 50 sets";
    o.require(worst <= 1e-12, "recursion to 1e-12");
}

void eps_divergence(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    EpsConfig cfg;
    cfg.d = 3;
    cfg.p = 2;
    cfg.lambda = 3.5;
    cfg.kappa = 1.25;
    cfg.rho = 1;
    cfg.D = WeightFunction::geometric(0.5);
    const DivergenceCurve c = theorem42_divergence(cfg, {1e2, 1e3, 1e4, 1e5});
    const double predicted = 2 * (2 - cfg.kappa - 1 / cfg.p);
    const double secs = seconds_since(t0);
    o.detail << "norm spread " << c.aux_spread() << ", slope " << c.fitted_slope << " (predicted " << predicted
             << "), growth x" << std::exp(c.log_growth()) << ", " << secs << " s";
    o.require(c.aux_spread() <= 1e-12, "norms identical to 1e-12");
    o.require(c.monotone(), "monotone growth");
    o.require(std::abs(c.fitted_slope - predicted) <= 0.15 * predicted, "slope within 15%");
    o.require(c.log_growth() > std::log(10.0), "growth > 10");
    o.require(secs < 300, "runtime < 5 min");
}

void inf_growth(Outcome& o) {
    const NormParams np{1.0, inf, 1, 1.0};
    const WeightFunction D = WeightFunction::constant();
    const InfFamily f = build_inf_family(np, D);
    const SequenceNorm n = sequence_norm(f.w, D, np, 10000);
    const double target = std::numbers::pi * std::numbers::pi / 6;
    o.detail << "partial " << n.partial << " + tail " << n.tail_bound << " vs pi^2/6;";
    o.require(n.partial <= target && target <= n.partial + n.tail_bound, "pi^2/6 within tail bound");
    const DivergenceCurve c = inf_family_divergence(np, D, default_mmax_grid());
    bool fourfold = c.points.size() >= 2;
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const double r = std::exp(c.points[i].log_value - c.points[i - 1].log_value);
        o.detail << " x" << r;
        fourfold = fourfold && std::abs(r - 4) <= 0.4;
    }
    o.require(fourfold, "each doubling multiplies by 4 +- 10%");
}

void box_growth(Outcome& o) {
    BoxConfig cfg;
    cfg.kappa = 1.1;
    cfg.D = WeightFunction::factorial();
    const KernelSequence w = build_box_family(cfg);
    const double term = std::exp(box_family_log_term(w, 10, cfg));
    const double expect = 184756 / std::pow(10.0, 2.2);
    const DivergenceCurve c = box_family_divergence(cfg, 30);
    const BoxNormCheck chk = box_family_norm_check(cfg, 100000, 20);
    const double zeta_sq = 112.030549307199366627299154769;  // zeta(1.1)^2
    o.detail << "term(10) rel " << rel(term, expect) << ", partial(30) " << c.points.back().value() << ", norm "
             << chk.partial << " + " << chk.tail_bound;
    o.require(rel(term, expect) <= 1e-10, "M=10 term to 1e-10");
    o.require(c.points.back().parameter <= 30 && c.points.back().value() > 1e6, "partial sums > 1e6 by M=30");
    o.require(chk.partial <= zeta_sq && zeta_sq <= chk.partial + chk.tail_bound, "zeta(1.1)^2 within tail bound");
}

void doubling_lemma(Outcome& o) {
    for (double kappa : {0.0, 2.0}) {
        const DivergenceCurve c = sequence_lemma_probe(SequenceSpec::factorial(), kappa, 25);
        double peak = -inf;
        for (const auto& p : c.points) peak = std::max(peak, p.log_value);
        const double ratio = std::exp(peak - c.points.front().log_value);
        o.detail << "kappa " << kappa << ": max b_n/b_1 " << ratio << ", first violation";
        o.require(ratio > 1e6, "b_n growth > 1e6 at kappa " + std::to_string(int(kappa)));
        for (double K : {10.0, 1e3, 1e6}) {
            const auto n = contradiction_bound_violation(SequenceSpec::factorial(), kappa, K, 40);
            o.detail << " K=" << K << ":" << (n ? std::to_string(*n) : "none");
            o.require(n && *n <= 20, "violation at n <= 20 for kappa " + std::to_string(int(kappa)) + ", K " +
                                         std::to_string(K));
        }
        o.detail << "; ";
    }
}

void necessary_conditions(Outcome& o) {
    const NormParams np{0.75, 1.5, 1, 1.0};
    const PLt2Family f = build_p_lt2_family(1.5, np);
    McOptions mc;
    mc.samples = 200000;
    const DivergenceCurve me = matrix_element_divergence_probe(f, default_delta_grid(np.rho), mc);
    const double predicted = f.m + f.n;
    o.detail << "log-squared slope " << me.fitted_slope << ", kernel norm spread " << me.aux_spread();
    o.require(std::abs(me.fitted_slope - predicted) <= 0.10 * predicted, "exponent fit within 10%");
    o.require(me.aux_spread() <= 0.05, "kernel norm stable within 5%");

    const NormParams below{0.5, 2.0, 3, 1.0};
    const double thr = below.d * (1 - below.p / 2) + below.p / 2, eps = (thr - below.lambda) / 2;
    const double exponent = below.d + (2 * below.lambda - 2 * below.d + 2 * eps - below.p) / below.p;
    const DivergenceCurve lt = lambda_threshold_probe(below, geometric_grid(0.25, 0.1, 8));
    o.detail << "; threshold slope " << lt.fitted_slope << " vs " << exponent;
    o.require(std::abs(lt.fitted_slope - exponent) <= 0.01 * std::abs(exponent), "threshold slope within 1%");
}

void product_bound(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const double mu = 0.5, xi = 0.5, rho = 1.0;
    RandomFamilyOptions opt;
    opt.max_index = 3;
    opt.np = product_bound_params(mu, rho);
    o.require(opt.np.p == 2 && opt.np.lambda == 3 + 2 * mu, "p = 2, lambda = 3 + 2 mu");
    McOptions mc;
    mc.samples = 10000;
    Rng rng(31);
    int checked = 0, failed = 0, stream = 0;
    double worst = inf;
    for (int i = 0; i < 50; ++i) {
        const KernelSequence w = random_family(rng, opt), v = random_family(rng, opt);
        const int K = std::max(w.max_index(), v.max_index());
        for (int M = 0; M <= 2 * K; ++M)
            for (int N = 0; N <= 2 * K; ++N) {
                McOptions oo = mc;
                oo.seed = stream_seed(31, std::uint64_t(stream++));
                const BoundCertificate c = componentwise_bound_check(w, v, M, N, mu, xi, rho, oo);
                ++checked;
                if (!c.holds) ++failed;
                if (c.lhs > 0) worst = std::min(worst, c.margin);
            }
    }
    const double secs = seconds_since(t0);
    o.detail << checked << " components on 50 family pairs, " << failed << " violations, smallest margin " << worst
             << ", " << secs << " s";
    o.require(failed == 0, "bound holds within 4 sigma");
    o.require(secs < 600, "runtime < 10 min");
}

void factorial_bound(Outcome& o) {
    RandomFamilyOptions oa;
    oa.max_index = 4;
    oa.np = {4.0, 2.0, 3, 1.0};
    oa.shape = FamilyShape::AnnihilationOnly;
    RandomFamilyOptions oc = oa;
    oc.shape = FamilyShape::CreationOnly;
    McOptions mc;
    mc.samples = 10000;
    Rng rng(32);
    int held = 0, collapsed = 0;
    for (int i = 0; i < 20; ++i) {
        const KernelSequence w = random_family(rng, oa), v = random_family(rng, oc);
        McOptions oo = mc;
        oo.seed = stream_seed(32, std::uint64_t(i));
        const BoundCertificate c = factorial_submult_check(w, v, oa.np, oo);
        held += c.holds;
        collapsed += c.structural_ok;
    }
    o.detail << held << "/20 bounds hold, " << collapsed << "/20 structural collapses exact";
    o.require(held == 20, "product norm <= e |w| |v| within 4 sigma");
    o.require(collapsed == 20, "structural collapse");
}

KernelComponent monomial(int m, int n, double alpha) {
    KernelComponent k;
    k.m = m;
    k.n = n;
    k.creation.alpha = alpha;
    k.annihilation.alpha = alpha;
    k.constraint = SimplexJoint{1.0, SimplexScope::Joint};
    k.dimension = 1;
    return k;
}

double dense_svd_norm(const SparseMatrix& A) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (const auto& e : A.entries()) d(e.row, e.col) = e.value;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(d).singularValues()(0);
}

void fock(Outcome& o) {
    int held = 0, total = 0;
    for (int cells : {8, 16, 32}) {
        const DiscreteFock f(MomentumGrid::uniform(cells), 3);
        for (auto [m, n] : {std::pair{0, 1}, {1, 0}, {1, 1}}) {
            held += opnorm_bound_check(f, monomial(m, n, 2.0), 0.5).holds;
            ++total;
        }
    }
    o.detail << held << "/" << total << " operator-norm bounds hold";
    o.require(held == total, "operator-norm bound");

    double worst = 0;
    int compared = 0;
    for (auto [cells, nph] : {std::pair{8, 3}, {16, 2}, {6, 3}}) {
        const DiscreteFock f(MomentumGrid::uniform(cells), nph);
        if (f.reduced_dimension() > 200) continue;
        for (auto [m, n] : {std::pair{0, 1}, {1, 0}, {1, 1}, {2, 1}}) {
            const SparseMatrix W = build_interaction_matrix(f, monomial(m, n, 2.0));
            const double oracle = dense_svd_norm(W);
            worst = std::max(worst, rel(operator_norm(W), oracle));
            ++compared;
        }
    }
    o.detail << ", power iteration vs SVD max rel " << worst << " (" << compared << " matrices)";
    o.require(compared > 0 && worst <= 1e-8, "power iteration matches SVD to 1e-8");

    const NormParams np{0.75, 1.5, 1, 1.0};
    const std::vector<double> widths = default_shell_widths();
    const DivergenceCurve c = unboundedness_exhibit(np.p, np, widths);
    const double growth = std::exp(c.log_growth());
    o.detail << ", Rayleigh growth x" << growth << " over resolution x" << widths.front() / widths.back();
    o.require(c.monotone(), "Rayleigh quotients increase");
    o.require(growth >= 10, "Rayleigh growth >= x10");
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"gamma-integral identity", gamma_identity},
        {"gamma-integral recursion", recursion},
        {"epsilon-family divergence in a", eps_divergence},
        {"p = infinity quadratic growth", inf_growth},
        {"factorial-weight box family", box_growth},
        {"doubling-sequence lemma", doubling_lemma},
        {"necessary conditions on p and lambda", necessary_conditions},
        {"componentwise product bound", product_bound},
        {"factorial-weight product bound", factorial_bound},
        {"Fock-space operator norms", fock},
    };
    int failures = 0, id = 0;
    for (const auto& [name, check] : criteria) {
        ++id;
        Outcome o;
        try {
            check(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failures += !o.pass;
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures ? 1 : 0;
}
