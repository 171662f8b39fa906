#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "core.hpp"
#include "curves.hpp"
#include "kernels.hpp"
#include "norms.hpp"
#include "wick.hpp"

namespace wicknorm {

using json = nlohmann::json;

// Non-finite reals are written as null.
inline json real(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double real_from(const json& j) { return j.is_null() ? nan : j.get<double>(); }

inline const char* to_string(SimplexScope s) {
    switch (s) {
        case SimplexScope::Creation: return "creation";
        case SimplexScope::Annihilation: return "annihilation";
        case SimplexScope::Joint: return "joint";
        case SimplexScope::Each: return "each";
    }
    return "?";
}

inline SimplexScope scope_from_string(const std::string& s) {
    if (s == "creation") return SimplexScope::Creation;
    if (s == "annihilation") return SimplexScope::Annihilation;
    if (s == "joint") return SimplexScope::Joint;
    if (s == "each") return SimplexScope::Each;
    throw PreconditionError("unknown simplex scope '" + s + "'");
}

inline json to_json(const RadialFactor& f) {
    return {{"alpha", f.alpha}, {"beta", f.beta}, {"center", f.singular_center}};
}

inline RadialFactor radial_from_json(const json& j) {
    return {j.at("alpha").get<double>(), j.value("beta", 0.0), j.value("center", 0.0)};
}

inline json to_json(const KernelComponent& k) {
    json c;
    if (const auto* b = std::get_if<BoxPerCoordinate>(&k.constraint))
        c = {{"type", "box"}, {"bound", b->bound}};
    else {
        const auto& s = std::get<SimplexJoint>(k.constraint);
        c = {{"type", "simplex"}, {"bound", s.bound}, {"scope", to_string(s.scope)}};
    }
    return {{"m", k.m},
            {"n", k.n},
            {"log_coeff", real(k.log_coeff)},
            {"creation", to_json(k.creation)},
            {"annihilation", to_json(k.annihilation)},
            {"constraint", c},
            {"dimension", k.dimension}};
}

inline KernelComponent component_from_json(const json& j) {
    KernelComponent k;
    k.m = j.at("m").get<int>();
    k.n = j.at("n").get<int>();
    k.log_coeff = j.contains("log_coeff") ? real_from(j.at("log_coeff")) : std::log(j.at("coeff").get<double>());
    if (std::isnan(k.log_coeff)) k.log_coeff = -inf;
    if (j.contains("creation")) k.creation = radial_from_json(j.at("creation"));
    if (j.contains("annihilation")) k.annihilation = radial_from_json(j.at("annihilation"));
    const json& c = j.at("constraint");
    const std::string type = c.at("type").get<std::string>();
    if (type == "box")
        k.constraint = BoxPerCoordinate{c.at("bound").get<double>()};
    else if (type == "simplex")
        k.constraint = SimplexJoint{c.at("bound").get<double>(), scope_from_string(c.value("scope", "joint"))};
    else
        throw PreconditionError("unknown constraint type '" + type + "'");
    k.dimension = j.value("dimension", 1);
    k.validate();
    return k;
}

inline const char* to_string(SupportPattern p) {
    switch (p) {
        case SupportPattern::Explicit: return "explicit";
        case SupportPattern::AnnihilationRow: return "annihilation-row";
        case SupportPattern::CreationColumn: return "creation-column";
        case SupportPattern::Grid: return "grid";
    }
    return "?";
}

// Generated families are written through their first max_index components plus the tail model.
inline json to_json(const KernelSequence& s, int max_index = 10) {
    json comps = json::array();
    for (auto [m, n] : s.indices(s.finite() ? s.max_index() : max_index)) comps.push_back(to_json(*s.component(m, n)));
    json out{{"pattern", to_string(s.pattern())}, {"components", comps}};
    if (!s.finite()) out["materialized_to"] = max_index;
    if (const auto& t = s.tail()) out["tail"] = {{"scale", t->scale}, {"kappa", t->kappa}, {"rank", t->rank}};
    return out;
}

inline KernelSequence sequence_from_json(const json& j) {
    KernelSequence s;
    for (const auto& c : j.at("components")) s.insert(component_from_json(c));
    return s;
}

inline const char* to_string(WeightFunction::Kind k) {
    using K = WeightFunction::Kind;
    switch (k) {
        case K::Geometric: return "geometric";
        case K::Factorial: return "factorial";
        case K::Power: return "power";
        case K::Constant: return "constant";
        case K::Tabulated: return "tabulated";
    }
    return "?";
}

inline json to_json(const WeightFunction& D) {
    using K = WeightFunction::Kind;
    json j{{"kind", to_string(D.kind())}};
    if (D.kind() == K::Geometric || D.kind() == K::Power) j["parameter"] = D.parameter();
    if (D.kind() == K::Tabulated) j["table"] = D.table();
    return j;
}

inline WeightFunction weight_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "geometric") return WeightFunction::geometric(j.at("parameter").get<double>());
    if (kind == "factorial") return WeightFunction::factorial();
    if (kind == "constant") return WeightFunction::constant();
    if (kind == "power") return WeightFunction::power(j.at("parameter").get<double>());
    if (kind == "tabulated") return WeightFunction::tabulated(j.at("table").get<std::vector<double>>());
    throw PreconditionError("unknown weight kind '" + kind + "'");
}

// "geometric:0.5", "factorial", "constant", "power:2", "tabulated:1;1;2;6"
inline WeightFunction parse_weight(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto number = [&] {
        if (arg.empty()) throw PreconditionError("weight '" + kind + "' needs a parameter");
        return std::stod(arg);
    };
    if (kind == "geometric") return WeightFunction::geometric(number());
    if (kind == "factorial") return WeightFunction::factorial();
    if (kind == "constant") return WeightFunction::constant();
    if (kind == "power") return WeightFunction::power(number());
    if (kind == "tabulated") {
        std::vector<double> v;
        std::stringstream ss(arg);
        for (std::string tok; std::getline(ss, tok, ';');) v.push_back(std::stod(tok));
        return WeightFunction::tabulated(std::move(v));
    }
    throw PreconditionError("unknown weight kind '" + kind + "'");
}

inline json to_json(const NormResult& r) {
    json j{{"value", real(r.value())},
           {"log_value", real(r.log_value)},
           {"infinite", r.infinite},
           {"method", to_string(r.method)},
           {"std_error", r.std_error()}};
    if (!r.divergent_reason.empty()) j["reason"] = r.divergent_reason;
    return j;
}

inline json to_json(const McEstimate& e) {
    return {{"value", real(e.value)}, {"std_error", real(e.std_error)}, {"samples", e.samples}, {"seed", e.seed}};
}

inline json to_json(const SequenceNorm& s) {
    return {{"partial", real(s.partial)},     {"std_error", s.std_error}, {"certified_finite", s.certified_finite},
            {"tail_bound", real(s.tail_bound)}, {"infinite", s.infinite}, {"terms", s.terms},
            {"reason", s.reason}};
}

inline json to_json(const WickSeries& s) {
    json terms = json::array();
    for (const auto& t : s.terms)
        terms.push_back({{"q", t.q}, {"log_coeff", real(t.log_coeff)}, {"t_exponent", t.t_exponent}});
    return {{"M", s.M},
            {"N", s.N},
            {"q_truncation", s.q_truncation},
            {"tail_bound", real(s.tail_bound)},
            {"tolerance", s.tolerance},
            {"divergent", s.divergent},
            {"reason", s.reason},
            {"terms", terms}};
}

inline json to_json(const DivergenceCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points)
        pts.push_back({{"parameter", p.parameter}, {"value", real(p.value())}, {"log_value", real(p.log_value)},
                       {"aux", real(p.aux)}});
    return {{"parameter_name", c.parameter_name},
            {"value_name", c.value_name},
            {"aux_name", c.aux_name},
            {"scale", to_string(c.scale)},
            {"points", pts},
            {"fitted_slope", real(c.fitted_slope)},
            {"predicted_slope", real(c.predicted_slope)},
            {"slope_tolerance", c.slope_tolerance},
            {"required_growth", c.required_growth},
            {"growth", real(std::exp(c.log_growth()))},
            {"verdict", to_string(c.verdict)},
            {"note", c.note}};
}

inline json to_json(const BoundCertificate& c) {
    return {{"label", c.label},
            {"lhs", real(c.lhs)},
            {"lhs_std_error", real(c.lhs_std_error)},
            {"rhs", real(c.rhs)},
            {"margin", real(c.margin)},
            {"holds", c.holds},
            {"structural_ok", c.structural_ok}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != columns.size()) throw PreconditionError("csv: row width differs from header");
        rows.push_back(std::move(row));
    }
    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_escape(columns[i]);
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(r[i]);
            os << '\n';
        }
    }
};

// parameter, value, log10 value, aux
inline CsvTable curve_table(const DivergenceCurve& c) {
    CsvTable t;
    t.columns = {c.parameter_name, c.value_name, "log10_" + c.value_name, c.aux_name.empty() ? "aux" : c.aux_name};
    for (const auto& p : c.points)
        t.add({csv_number(p.parameter), csv_number(p.value()), csv_number(p.log_value / std::log(10.0)),
               csv_number(p.aux)});
    return t;
}

inline CsvTable certificate_table(const std::vector<BoundCertificate>& certs, const std::string& key = "case") {
    CsvTable t;
    t.columns = {key, "label", "lhs", "log10_lhs", "lhs_std_error", "rhs", "margin", "holds"};
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const auto& c = certs[i];
        t.add({std::to_string(i), c.label, csv_number(c.lhs), csv_number(std::log10(c.lhs)),
               csv_number(c.lhs_std_error), csv_number(c.rhs), csv_number(c.margin), c.holds ? "1" : "0"});
    }
    return t;
}

}  // namespace wicknorm
