#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"

namespace wicknorm {

enum class Verdict { DivergenceConfirmed, Inconclusive, AnalyticDivergence };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::DivergenceConfirmed: return "DivergenceConfirmed";
        case Verdict::Inconclusive: return "Inconclusive";
        case Verdict::AnalyticDivergence: return "AnalyticDivergence";
    }
    return "?";
}

// How the slope is fitted:
//   LogLog            log value against log parameter
//   LogLogIncrements  log of successive value differences against log parameter
//                     (removes a convergent additive constant on geometric grids)
//   LogLogOfLog       log value against log(log(reference / parameter))
//   None              no slope; verdict by growth alone
enum class SlopeScale { LogLog, LogLogIncrements, LogLogOfLog, None };

inline const char* to_string(SlopeScale s) {
    switch (s) {
        case SlopeScale::LogLog: return "loglog";
        case SlopeScale::LogLogIncrements: return "loglog-increments";
        case SlopeScale::LogLogOfLog: return "loglog-of-log";
        case SlopeScale::None: return "none";
    }
    return "?";
}

struct CurvePoint {
    double parameter = 0;
    double log_value = -inf;
    double aux = nan;  // side quantity tracked along the curve (e.g. an input norm)
    double value() const { return std::exp(log_value); }
};

struct DivergenceCurve {
    std::string parameter_name;
    std::string value_name = "bound";
    std::string aux_name;
    std::vector<CurvePoint> points;
    SlopeScale scale = SlopeScale::LogLog;
    double reference = 1.0;
    double fitted_slope = nan;
    double predicted_slope = nan;
    double slope_tolerance = 0.15;  // relative
    double required_growth = 10.0;
    bool require_monotone = true;
    double aux_tolerance = nan;     // relative spread allowed in aux, NaN: unchecked
    Verdict verdict = Verdict::Inconclusive;
    std::string note;

    double log_growth() const {
        if (points.size() < 2) return 0.0;
        return points.back().log_value - points.front().log_value;
    }
    bool monotone() const {
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i].log_value > points[i - 1].log_value)) return false;
        return true;
    }
    bool parameters_monotone() const {
        bool up = true, down = true;
        for (std::size_t i = 1; i < points.size(); ++i) {
            up = up && points[i].parameter > points[i - 1].parameter;
            down = down && points[i].parameter < points[i - 1].parameter;
        }
        return up || down;
    }
    double aux_spread() const {
        double lo = inf, hi = -inf;
        for (const auto& p : points) {
            lo = std::min(lo, p.aux);
            hi = std::max(hi, p.aux);
        }
        return lo > 0 ? hi / lo - 1.0 : inf;
    }

    void fit() {
        std::vector<double> x, y;
        switch (scale) {
            case SlopeScale::LogLog:
                for (const auto& p : points) {
                    x.push_back(std::log(p.parameter));
                    y.push_back(p.log_value);
                }
                break;
            case SlopeScale::LogLogIncrements:
                for (std::size_t i = 1; i < points.size(); ++i) {
                    const double diff = points[i].value() - points[i - 1].value();
                    if (!(diff > 0)) continue;
                    x.push_back(std::log(points[i].parameter));
                    y.push_back(std::log(diff));
                }
                break;
            case SlopeScale::LogLogOfLog:
                for (const auto& p : points) {
                    x.push_back(std::log(std::log(reference / p.parameter)));
                    y.push_back(p.log_value);
                }
                break;
            case SlopeScale::None: break;
        }
        fitted_slope = scale == SlopeScale::None ? nan : fit_slope(x, y);
    }

    // Fits the slope and sets the verdict unless it was decided analytically.
    void finalize() {
        if (verdict == Verdict::AnalyticDivergence) return;
        if (!parameters_monotone()) throw PreconditionError("divergence curve: parameters must be strictly monotone");
        fit();
        bool ok = points.size() >= 2 && log_growth() > std::log(required_growth);
        if (require_monotone) ok = ok && monotone();
        if (!std::isnan(predicted_slope))
            ok = ok && std::abs(fitted_slope - predicted_slope) <= slope_tolerance * std::abs(predicted_slope);
        if (!std::isnan(aux_tolerance)) ok = ok && aux_spread() <= aux_tolerance;
        verdict = ok ? Verdict::DivergenceConfirmed : Verdict::Inconclusive;
    }
};

}  // namespace wicknorm
