#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "core.hpp"
#include "counterexamples.hpp"
#include "fock.hpp"
#include "io.hpp"
#include "norms.hpp"
#include "specfun.hpp"
#include "wick.hpp"

namespace wicknorm {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParamSpec {
    std::string name;
    std::string default_value;
    std::string help;
};

class Config {
public:
    std::map<std::string, std::string> values;

    const std::string& text(const std::string& k) const {
        auto it = values.find(k);
        if (it == values.end()) throw ConfigError("missing parameter '" + k + "'");
        return it->second;
    }
    double number(const std::string& k) const {
        const std::string& s = text(k);
        if (s == "inf" || s == "infinity") return inf;
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("parameter '" + k + "' is not a number: '" + s + "'");
        }
    }
    int integer(const std::string& k) const {
        const double v = number(k);
        if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError("parameter '" + k + "' must be an integer");
        return int(v);
    }
    std::uint64_t unsigned_integer(const std::string& k) const {
        const std::string& s = text(k);
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used, 0);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("parameter '" + k + "' must be a non-negative integer");
        }
    }
    std::vector<double> numbers(const std::string& k) const {
        std::vector<double> out;
        std::stringstream ss(text(k));
        for (std::string tok; std::getline(ss, tok, ',');) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("parameter '" + k + "' has a non-numeric entry '" + tok + "'");
            }
        }
        return out;
    }
};

struct ExperimentResult {
    CsvTable table;
    json summary = json::object();
    bool passed = false;
};

struct Experiment {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    std::function<ExperimentResult(const Config&)> run;
};

namespace detail {

inline std::string fmt(double x) { return csv_number(x); }

inline McOptions mc_from(const Config& c) {
    McOptions o;
    o.samples = c.unsigned_integer("samples");
    o.seed = c.unsigned_integer("seed");
    return o;
}

inline ExperimentResult curve_result(const DivergenceCurve& cur, bool pass) {
    ExperimentResult r;
    r.table = curve_table(cur);
    r.summary["curve"] = to_json(cur);
    r.passed = pass;
    return r;
}

inline ExperimentResult gamma_check(const Config& c) {
    const int trials = c.integer("trials"), rec = c.integer("recursion_trials"), maxM = c.integer("max_M");
    const std::uint64_t samples = c.unsigned_integer("samples"), seed = c.unsigned_integer("seed");
    if (maxM < 1 || maxM > mc_simplex_max_dim) throw ConfigError("max_M must lie in [1, 12]");
    ExperimentResult r;
    r.table.columns = {"kind", "M", "m", "rho", "x", "y", "closed", "reference", "std_error", "score", "pass"};
    Rng rng(seed);
    bool all = true;
    int n_mc = 0, n_exact = 0;
    auto row = [&](const std::string& kind, const GammaIntegralParams& p, double closed, double ref, double se,
                   double score, bool pass) {
        all = all && pass;
        r.table.add({kind, std::to_string(p.M), std::to_string(p.m), fmt(p.rho), fmt(p.x), fmt(p.y), fmt(closed),
                     fmt(ref), fmt(se), fmt(score), pass ? "1" : "0"});
    };
    auto draw = [&](int M) {
        GammaIntegralParams p;
        p.M = M;
        p.m = rng.below(M + 1);
        p.rho = rng.uniform(0.2, 1.5);
        p.x = rng.uniform(0.3, 3.0);
        p.y = rng.uniform(0.0, 3.0);
        return p;
    };
    for (int i = 0; i < trials; ++i) {
        const GammaIntegralParams p = draw(1 + rng.below(maxM));
        const double closed = simplex_gamma_integral(p);
        const McEstimate e = simplex_gamma_integral_mc(p, samples, stream_seed(seed, i));
        const double z = std::abs(closed - e.value) / e.std_error;
        row("mc", p, closed, e.value, e.std_error, z, z <= 4.0);
        ++n_mc;
        GammaIntegralParams unit = p;
        unit.rho = 1.0;
        const double scaled = std::pow(p.rho, p.M * p.x + p.y) * simplex_gamma_integral(unit);
        const double rel = std::abs(closed / scaled - 1);
        row("scaling", p, closed, scaled, 0, rel, rel <= 1e-12);
        ++n_exact;
        GammaIntegralParams full = p, none = p;
        full.m = p.M;
        none.m = 0;
        const double full_ref = std::exp((p.M * p.x + p.y) * std::log(p.rho) + p.M * log_gamma(p.x) +
                                         log_gamma(p.y + 1) - log_gamma(p.M * p.x + p.y + 1));
        const double rf = std::abs(simplex_gamma_integral(full) / full_ref - 1);
        row("m=M", full, simplex_gamma_integral(full), full_ref, 0, rf, rf <= 1e-12);
        const std::vector<double> xs(p.M, p.x);
        const double none_ref = std::pow(p.rho, p.y) * std::exp(log_dirichlet_integral(xs, p.rho));
        const double rn = std::abs(simplex_gamma_integral(none) / none_ref - 1);
        row("m=0", none, simplex_gamma_integral(none), none_ref, 0, rn, rn <= 1e-12);
        n_exact += 2;
    }
    for (int i = 0; i < rec; ++i) {
        GammaIntegralParams p = draw(2 + rng.below(7));
        if (p.m == 0) p.m = 1;
        const auto [l, rr] = recursion_check(p);
        const double rel = std::abs(l / rr - 1);
        row("recursion", p, l, rr, 0, rel, rel <= 1e-12);
        ++n_exact;
    }
    r.summary["mc_trials"] = n_mc;
    r.summary["exact_checks"] = n_exact;
    r.passed = all;
    return r;
}

inline SupportConstraint constraint_from(const Config& c) {
    const std::string kind = c.text("constraint");
    if (kind == "box") return BoxPerCoordinate{c.number("bound")};
    if (kind == "simplex") return SimplexJoint{c.number("bound"), scope_from_string(c.text("scope"))};
    throw ConfigError("constraint must be 'simplex' or 'box'");
}

inline ExperimentResult norm(const Config& c) {
    const NormParams np{c.number("lambda"), c.number("p"), c.integer("d"), c.number("rho")};
    KernelComponent k;
    k.m = c.integer("m");
    k.n = c.integer("n");
    if (!(c.number("coeff") > 0)) throw ConfigError("coeff must be positive");
    k.log_coeff = std::log(c.number("coeff"));
    k.creation = {c.number("alpha_c"), c.number("beta_c"), c.number("center")};
    k.annihilation = {c.number("alpha_a"), c.number("beta_a"), c.number("center")};
    k.constraint = constraint_from(c);
    k.dimension = np.d;
    const NormResult nr = component_norm(k, np, mc_from(c));
    ExperimentResult r;
    r.table.columns = {"m", "n", "value", "log10_value", "std_error", "method", "infinite"};
    r.table.add({std::to_string(k.m), std::to_string(k.n), fmt(nr.value()), fmt(nr.log_value / std::log(10.0)),
                 fmt(nr.std_error()), to_string(nr.method), nr.infinite ? "1" : "0"});
    r.summary["kernel"] = to_json(k);
    r.summary["norm"] = to_json(nr);
    r.passed = true;
    return r;
}

inline EpsConfig eps_config_from(const Config& c) {
    EpsConfig cfg;
    cfg.d = c.integer("d");
    cfg.p = c.number("p");
    cfg.lambda = c.number("lambda");
    cfg.rho = c.number("rho");
    cfg.kappa = c.number("kappa");
    cfg.D = parse_weight(c.text("weight"));
    return cfg;
}

inline ExperimentResult wick_norm(const Config& c) {
    const EpsConfig cfg = eps_config_from(c);
    const double a = c.number("a");
    const int M = c.integer("M"), N = c.integer("N");
    const EpsFamily f = build_eps_family(1.0 / a, cfg);
    const WickSeries s = wick_component_closed(f.w, f.v, M, N, cfg.params(), c.number("tol"));
    ExperimentResult r;
    r.summary["series"] = to_json(s);
    r.table.columns = {"M", "N", "a", "q_truncation", "norm", "std_error", "q1_bound", "holds"};
    if (s.divergent) {
        r.table.add({std::to_string(M), std::to_string(N), fmt(a), std::to_string(s.q_truncation), "inf", "0",
                     fmt(q1_lower_bound_norm(M, N, a, cfg)), "1"});
        r.passed = true;
        return r;
    }
    const McEstimate e = wick_component_norm(s, cfg.params(), mc_from(c));
    const double q1 = q1_lower_bound_norm(M, N, a, cfg);
    const bool holds = q1 <= e.value + 4 * e.std_error;
    r.table.add({std::to_string(M), std::to_string(N), fmt(a), std::to_string(s.q_truncation), fmt(e.value),
                 fmt(e.std_error), fmt(q1), holds ? "1" : "0"});
    r.summary["norm"] = to_json(e);
    r.summary["q1_bound"] = real(q1);
    r.passed = holds;
    return r;
}

inline ExperimentResult thm42(const Config& c) {
    const EpsConfig cfg = eps_config_from(c);
    EpsDivergenceOptions opt;
    opt.tolerance = c.number("tol");
    const DivergenceCurve cur = theorem42_divergence(cfg, c.numbers("a"), opt);
    return curve_result(cur, cur.verdict == Verdict::DivergenceConfirmed);
}

inline ExperimentResult thm43(const Config& c) {
    const NormParams np{c.number("lambda"), inf, c.integer("d"), c.number("rho")};
    const WeightFunction D = parse_weight(c.text("weight"));
    const DivergenceCurve cur = inf_family_divergence(np, D, c.numbers("mmax"));
    ExperimentResult r = curve_result(cur, cur.verdict != Verdict::Inconclusive);
    if (cur.verdict != Verdict::AnalyticDivergence) {
        const int K = c.integer("norm_index");
        const SequenceNorm sn = sequence_norm(build_inf_family(np, D).w, D, np, K);
        r.summary["input_norm"] = to_json(sn);
        r.summary["input_norm_limit"] = D.value(0) * M_PI * M_PI / 6;
    }
    return r;
}

inline BoxConfig box_config_from(const Config& c) {
    BoxConfig cfg;
    cfg.d = c.integer("d");
    cfg.p = c.number("p");
    cfg.lambda = c.number("lambda");
    cfg.rho = c.number("rho");
    cfg.kappa = c.number("kappa");
    cfg.D = parse_weight(c.text("weight"));
    return cfg;
}

inline ExperimentResult thm52(const Config& c) {
    const BoxConfig cfg = box_config_from(c);
    const DivergenceCurve cur = box_family_divergence(cfg, c.integer("mmax"));
    const BoxNormCheck chk = box_family_norm_check(cfg, c.integer("norm_index"));
    ExperimentResult r = curve_result(cur, cur.verdict == Verdict::DivergenceConfirmed && chk.factorization_error < 1e-10);
    r.summary["input_norm"] = {{"partial", chk.partial},
                               {"tail_bound", chk.tail_bound},
                               {"factorization_error", chk.factorization_error}};
    return r;
}

inline SequenceSpec sequence_from(const std::string& s) {
    if (s == "factorial") return SequenceSpec::factorial();
    if (s.rfind("superexp:", 0) == 0) return SequenceSpec::super_exp(std::stod(s.substr(9)));
    if (s.rfind("tabulated:", 0) == 0) {
        std::vector<double> v{1.0};  // index 0 is unused
        std::stringstream ss(s.substr(10));
        for (std::string tok; std::getline(ss, tok, ';');) v.push_back(std::stod(tok));
        return SequenceSpec::tabulated(std::move(v));
    }
    throw ConfigError("sequence must be factorial, superexp:<c> or tabulated:<a1;a2;...>");
}

inline ExperimentResult lemma_sum(const Config& c) {
    const SequenceSpec a = sequence_from(c.text("sequence"));
    const double kappa = c.number("kappa");
    const DivergenceCurve cur = sequence_lemma_probe(a, kappa, c.integer("nmax"));
    ExperimentResult r;
    r.table.columns = {"n", "b_n", "log10_b_n"};
    for (const auto& p : cur.points)
        r.table.add({std::to_string(int(p.parameter)), fmt(p.value()), fmt(p.log_value / std::log(10.0))});
    r.summary["curve"] = to_json(cur);
    bool all = cur.verdict == Verdict::DivergenceConfirmed;
    json viol = json::array();
    for (double K : c.numbers("K")) {
        const auto n = contradiction_bound_violation(a, kappa, K, c.integer("bound_nmax"));
        viol.push_back({{"K", K}, {"first_violation", n ? json(*n) : json(nullptr)}});
        all = all && n.has_value();
    }
    r.summary["contradiction_bound"] = viol;
    r.passed = all;
    return r;
}

inline ExperimentResult p_lt2(const Config& c) {
    const NormParams np{c.number("lambda"), c.number("p"), c.integer("d"), c.number("rho")};
    const PLt2Family f = build_p_lt2_family(np.p, np, c.integer("m"), c.integer("n"));
    std::vector<double> deltas = c.text("deltas").empty() ? default_delta_grid(np.rho) : c.numbers("deltas");
    const McOptions mc = mc_from(c);
    const DivergenceCurve cur = matrix_element_divergence_probe(f, deltas, mc);
    ExperimentResult r = curve_result(cur, cur.verdict == Verdict::DivergenceConfirmed);
    r.summary["psi_m_norm"] = to_json(test_vector_norm(f.psi_m, mc));
    r.summary["psi_n_norm"] = to_json(test_vector_norm(f.psi_n, mc));
    return r;
}

inline ExperimentResult lambda_threshold(const Config& c) {
    const NormParams np{c.number("lambda"), c.number("p"), c.integer("d"), c.number("rho")};
    const DivergenceCurve cur =
        lambda_threshold_probe(np, geometric_grid(c.number("delta0"), c.number("ratio"), c.integer("count")));
    return curve_result(cur, cur.verdict == Verdict::DivergenceConfirmed);
}

inline ExperimentResult certificates_result(const std::vector<BoundCertificate>& certs) {
    ExperimentResult r;
    r.table = certificate_table(certs);
    json arr = json::array();
    bool all = true;
    for (const auto& x : certs) {
        arr.push_back(to_json(x));
        all = all && x.holds;
    }
    r.summary["certificates"] = arr;
    r.summary["count"] = certs.size();
    r.passed = all;
    return r;
}

inline ExperimentResult bound31(const Config& c) {
    const double mu = c.number("mu"), xi = c.number("xi"), rho = c.number("rho");
    RandomFamilyOptions o;
    o.max_index = c.integer("max_index");
    o.np = product_bound_params(mu, rho, c.integer("d"));
    McOptions mc = mc_from(c);
    Rng rng(mc.seed);
    std::vector<BoundCertificate> certs;
    int stream = 0;
    for (int i = 0; i < c.integer("cases"); ++i) {
        const KernelSequence w = random_family(rng, o), v = random_family(rng, o);
        const int K = std::max(w.max_index(), v.max_index());
        for (int M = 0; M <= 2 * K; ++M)
            for (int N = 0; N <= 2 * K; ++N) {
                if (WickProduct(w, v, M, N, o.np).terms().empty()) continue;
                McOptions oo = mc;
                oo.seed = stream_seed(mc.seed, std::uint64_t(stream++));
                BoundCertificate cert = componentwise_bound_check(w, v, M, N, mu, xi, rho, oo);
                cert.label = "case " + std::to_string(i) + " " + cert.label;
                certs.push_back(std::move(cert));
            }
    }
    json maximal = nullptr;
    if (const int K = c.integer("maximal_K"); K > 0) {
        RandomFamilyOptions ok = o;
        ok.max_index = K;
        const KernelSequence w = random_family(rng, ok), v = random_family(rng, ok);
        McOptions oo = mc;
        oo.seed = stream_seed(mc.seed, std::uint64_t(stream++));
        MaximalIndexCertificate mi = maximal_index_bound(w, v, mu, xi, rho, oo);
        mi.total.label = "maximal K=" + std::to_string(std::max(w.max_index(), v.max_index()));
        mi.total.holds = mi.total.holds && mi.all_components_hold();
        certs.push_back(mi.total);
        maximal = {{"multiplier", mi.multiplier}, {"structural_ok", mi.structural_ok}, {"total", to_json(mi.total)}};
    }
    ExperimentResult r = certificates_result(certs);
    r.summary["maximal_index"] = maximal;
    return r;
}

inline ExperimentResult bound32(const Config& c) {
    RandomFamilyOptions oa;
    oa.max_index = c.integer("max_index");
    oa.np = {c.number("lambda"), 2.0, c.integer("d"), c.number("rho")};
    oa.shape = FamilyShape::AnnihilationOnly;
    RandomFamilyOptions oc = oa;
    oc.shape = FamilyShape::CreationOnly;
    McOptions mc = mc_from(c);
    Rng rng(mc.seed);
    std::vector<BoundCertificate> certs;
    for (int i = 0; i < c.integer("cases"); ++i) {
        const KernelSequence w = random_family(rng, oa), v = random_family(rng, oc);
        McOptions oo = mc;
        oo.seed = stream_seed(mc.seed, std::uint64_t(i));
        BoundCertificate cert = factorial_submult_check(w, v, oa.np, oo);
        cert.label = "case " + std::to_string(i) + (cert.structural_ok ? "" : " (collapse violated)");
        certs.push_back(std::move(cert));
    }
    return certificates_result(certs);
}

inline ExperimentResult fock_bound(const Config& c) {
    const double mu = c.number("mu"), alpha = c.number("alpha");
    std::vector<BoundCertificate> certs;
    for (double cells : c.numbers("cells")) {
        const DiscreteFock f(MomentumGrid::uniform(int(cells)), c.integer("nph"));
        for (auto [m, n] : {std::pair{0, 1}, std::pair{1, 0}, std::pair{1, 1}}) {
            KernelComponent k;
            k.m = m;
            k.n = n;
            k.creation.alpha = alpha;
            k.annihilation.alpha = alpha;
            k.constraint = SimplexJoint{1.0, SimplexScope::Joint};
            certs.push_back(opnorm_bound_check(f, k, mu));
        }
    }
    return certificates_result(certs);
}

inline ExperimentResult fock_unbounded(const Config& c) {
    const NormParams np{c.number("lambda"), c.number("p"), 1, c.number("rho")};
    const DivergenceCurve cur = unboundedness_exhibit(np.p, np, c.numbers("widths"), c.integer("coarse"));
    return curve_result(cur, cur.verdict == Verdict::DivergenceConfirmed);
}

}  // namespace detail

inline const std::vector<Experiment>& experiments() {
    static const std::vector<Experiment> list = {
        {"gamma-check",
         "simplex Gamma integral: closed form against Monte Carlo, scaling, special cases, recursion",
         {{"trials", "20", "random parameter sets checked against Monte Carlo"},
          {"recursion_trials", "50", "random parameter sets for the recursion"},
          {"max_M", "5", "largest simplex dimension"},
          {"samples", "1000000", "Monte Carlo samples per trial"},
          {"seed", "42", "random seed"}},
         detail::gamma_check},
        {"norm",
         "norm of a single kernel component",
         {{"d", "3", "dimension"},
          {"p", "2", "norm exponent (inf allowed)"},
          {"lambda", "3.5", "weight exponent"},
          {"rho", "1", "cutoff"},
          {"m", "0", "creation slots"},
          {"n", "1", "annihilation slots"},
          {"coeff", "1", "coefficient"},
          {"alpha_c", "0", "creation profile exponent"},
          {"alpha_a", "0.5", "annihilation profile exponent"},
          {"beta_c", "0", "creation singular exponent"},
          {"beta_a", "0", "annihilation singular exponent"},
          {"center", "0.5", "singular radius"},
          {"constraint", "simplex", "simplex or box"},
          {"scope", "joint", "simplex scope: creation, annihilation, joint, each"},
          {"bound", "1", "support bound"},
          {"samples", "200000", "Monte Carlo samples"},
          {"seed", "1", "random seed"}},
         detail::norm},
        {"wick-norm",
         "product component of the epsilon family against its q=1 lower bound",
         {{"d", "3", ""},
          {"p", "2", ""},
          {"lambda", "3.5", ""},
          {"rho", "1", ""},
          {"kappa", "1.25", ""},
          {"weight", "geometric:0.5", "weight function"},
          {"a", "10", "eps = 1/a"},
          {"M", "1", ""},
          {"N", "1", ""},
          {"tol", "1e-12", "relative truncation of the q-series"},
          {"samples", "200000", ""},
          {"seed", "1", ""}},
         detail::wick_norm},
        {"thm42",
         "weighted q=1 lower-bound sum against a for the epsilon family",
         {{"d", "3", ""},
          {"p", "2", ""},
          {"lambda", "3.5", ""},
          {"rho", "1", ""},
          {"kappa", "1.25", ""},
          {"weight", "geometric:0.5", ""},
          {"a", "100,1000,10000,100000", "grid of a = 1/eps"},
          {"tol", "1e-3", "relative tail of the M-sum"}},
         detail::thm42},
        {"thm43",
         "p = infinity: weighted q=2 lower-bound partial sums against M_max",
         {{"d", "1", ""},
          {"lambda", "1", ""},
          {"rho", "1", ""},
          {"weight", "constant", ""},
          {"mmax", "1000,2000,4000,8000,16000", "grid of M_max"},
          {"norm_index", "10000", "truncation of the input norm"}},
         detail::thm43},
        {"thm52",
         "box family with fast-growing weight: diagonal lower-bound partial sums",
         {{"d", "1", ""},
          {"p", "2", ""},
          {"lambda", "1", ""},
          {"rho", "1", ""},
          {"kappa", "1.1", ""},
          {"weight", "factorial", ""},
          {"mmax", "30", "largest M"},
          {"norm_index", "10000", "truncation of the input norm"}},
         detail::thm52},
        {"lemma-sum",
         "b_n = a_{2n}/(a_n^2 n^kappa) and the doubling contradiction bound",
         {{"sequence", "factorial", "factorial, superexp:<c>, tabulated:<a1;a2;...>"},
          {"kappa", "0", ""},
          {"nmax", "25", ""},
          {"K", "10,1000,1000000", "constants tested against the doubling bound"},
          {"bound_nmax", "20", "largest doubling exponent"}},
         detail::lemma_sum},
        {"p-lt2",
         "p < 2: truncated matrix element against the shell width",
         {{"p", "1.5", ""},
          {"d", "1", ""},
          {"lambda", "0.75", ""},
          {"rho", "1", ""},
          {"m", "1", ""},
          {"n", "1", ""},
          {"deltas", "", "shell widths (empty: default grid)"},
          {"samples", "200000", ""},
          {"seed", "1", ""}},
         detail::p_lt2},
        {"lambda-threshold",
         "lambda below threshold: truncated inner integral against delta",
         {{"d", "3", ""},
          {"p", "2", ""},
          {"lambda", "0.5", ""},
          {"rho", "1", ""},
          {"delta0", "0.25", "first delta"},
          {"ratio", "0.1", "geometric ratio"},
          {"count", "8", "grid points"}},
         detail::lambda_threshold},
        {"bound-31",
         "componentwise product bound on random families",
         {{"cases", "50", ""},
          {"max_index", "3", ""},
          {"mu", "0.5", ""},
          {"xi", "0.5", ""},
          {"rho", "1", ""},
          {"d", "3", ""},
          {"maximal_K", "2", "index of the extra maximal-index check (0: skip)"},
          {"samples", "10000", ""},
          {"seed", "31", ""}},
         detail::bound31},
        {"bound-32",
         "factorial-weight product bound on random one-sided families",
         {{"cases", "20", ""},
          {"max_index", "4", ""},
          {"d", "3", ""},
          {"lambda", "4", ""},
          {"rho", "1", ""},
          {"samples", "10000", ""},
          {"seed", "32", ""}},
         detail::bound32},
        {"fock-bound",
         "operator norms of discretized interactions against the kernel-norm bound",
         {{"cells", "8,16,32", "uniform grid sizes"},
          {"nph", "3", "photon cutoff"},
          {"mu", "0.5", ""},
          {"alpha", "2", "profile exponent of the test kernels"}},
         detail::fock_bound},
        {"fock-unbounded",
         "p < 2: Rayleigh quotients as the grid resolves the singular sphere",
         {{"p", "1.5", ""},
          {"lambda", "0.75", ""},
          {"rho", "1", ""},
          {"widths", "0.125,0.0125,0.00125", "cell widths at the singular sphere"},
          {"coarse", "8", "coarse uniform cells"}},
         detail::fock_unbounded},
    };
    return list;
}

inline const Experiment& find_experiment(const std::string& name) {
    for (const auto& e : experiments())
        if (e.name == name) return e;
    throw ConfigError("unknown experiment '" + name + "'");
}

// key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_text(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

// defaults <- file <- flags; unknown keys are rejected.
inline Config resolve_config(const Experiment& e, const std::map<std::string, std::string>& file,
                             const std::map<std::string, std::string>& flags) {
    Config c;
    for (const auto& p : e.params) c.values[p.name] = p.default_value;
    for (const auto* layer : {&file, &flags})
        for (const auto& [k, v] : *layer) {
            if (!c.values.count(k)) throw ConfigError("unknown parameter '" + k + "' for experiment " + e.name);
            c.values[k] = v;
        }
    return c;
}

inline void write_csv_file(std::ostream& os, const Experiment& e, const Config& c, const CsvTable& t) {
    os << "# wicknorm " << version << '\n' << "# experiment=" << e.name << '\n';
    for (const auto& [k, v] : c.values) os << "# " << k << '=' << v << '\n';
    t.write(os);
}

inline json summary_json(const Experiment& e, const Config& c, const ExperimentResult& r) {
    json j{{"experiment", e.name}, {"version", version}, {"config", c.values}, {"passed", r.passed}};
    for (const auto& [k, v] : r.summary.items()) j[k] = v;
    return j;
}

}  // namespace wicknorm
