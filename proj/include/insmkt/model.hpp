#pragma once

// Parameter bundles for the insurance market model, their validity rules, and
// the scalar quantities read directly off them (Sharpe ratio, margin ratio,
// insurance demand).
//
// Everything here is plain immutable data. validate() collects violations
// instead of throwing so a caller can report every problem in one pass. The
// struct initializers double as the benchmark parameter set used throughout
// the test suite and the shipped scenarios.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace insmkt {

struct InsuranceParams {
    double l = 0.5;    // expected loss rate per unit exposure per unit time
    double eta = 0.1;  // loss volatility per unit exposure
};

struct FinancialParams {
    double r = 0.04;     // risk-free rate
    double mu = 0.12;    // risky asset drift, must exceed r
    double sigma = 0.2;  // risky asset volatility
    double rho = 0.0;    // correlation between loss and asset shocks, in [-1, 1]
};

struct InsurerParams {
    double gamma = 2.0;  // absolute risk aversion of the exponential utility
    double t0 = 0.0;     // start of the planning window
    double T = 50.0;     // horizon
    double m0 = 0.0;     // initial wealth; optimal controls never depend on it,
                         // only the simulation oracle integrates from it
};

struct RegulatorParams {
    double theta_hi = 0.2;   // upper bound on the loading factor
    double theta_lo = -0.2;  // lower bound on the loading factor, no less than -1
    double eps_bar = 0.2;    // cap on the investment friction intensity
};

struct ModelParams {
    InsuranceParams insurance;
    FinancialParams financial;
    InsurerParams insurer;
    RegulatorParams regulator;

    double delta_theta() const { return regulator.theta_hi - regulator.theta_lo; }

    // e^{-r(T-s)}: discounts a time-s control back from the horizon. Every
    // closed form in this library carries one of these.
    double discount(double s) const {
        return std::exp(-financial.r * (insurer.T - s));
    }
    double growth(double s) const {
        return std::exp(financial.r * (insurer.T - s));
    }
};

struct Violation {
    std::string field;
    std::string rule;
};

struct ValidationResult {
    std::vector<Violation> violations;
    // |rho| == 1 is legal input, but the generic closed forms divide by
    // 1 - rho^2, so such parameters must be routed to the dedicated
    // perfect-correlation path.
    bool perfect_correlation = false;

    bool ok() const { return violations.empty(); }

    std::string describe() const {
        if (violations.empty()) return "ok";
        std::string out;
        for (const auto& v : violations) {
            if (!out.empty()) out += "; ";
            out += v.field + ": " + v.rule;
        }
        return out;
    }
};

inline ValidationResult validate(const ModelParams& p) {
    ValidationResult res;
    auto finite = [&res](const char* field, double v) {
        if (!std::isfinite(v)) res.violations.push_back({field, "must be finite"});
    };
    auto require = [&res](bool cond, const char* field, const char* rule) {
        if (!cond) res.violations.push_back({field, rule});
    };

    finite("insurance.l", p.insurance.l);
    finite("insurance.eta", p.insurance.eta);
    finite("financial.r", p.financial.r);
    finite("financial.mu", p.financial.mu);
    finite("financial.sigma", p.financial.sigma);
    finite("financial.rho", p.financial.rho);
    finite("insurer.gamma", p.insurer.gamma);
    finite("insurer.t0", p.insurer.t0);
    finite("insurer.T", p.insurer.T);
    finite("insurer.m0", p.insurer.m0);
    finite("regulator.theta_hi", p.regulator.theta_hi);
    finite("regulator.theta_lo", p.regulator.theta_lo);
    finite("regulator.eps_bar", p.regulator.eps_bar);

    require(p.insurance.l > 0.0, "insurance.l", "l > 0 required");
    require(p.insurance.eta > 0.0, "insurance.eta", "eta > 0 required");
    require(p.financial.sigma > 0.0, "financial.sigma", "sigma > 0 required");
    require(p.financial.mu > p.financial.r, "financial.mu", "mu > r required");
    require(std::abs(p.financial.rho) <= 1.0, "financial.rho", "|rho| <= 1 required");
    require(p.insurer.gamma > 0.0, "insurer.gamma", "gamma > 0 required");
    require(p.insurer.T > p.insurer.t0, "insurer.T", "T > t0 required");
    require(p.regulator.theta_hi > 0.0, "regulator.theta_hi", "theta_hi > 0 required");
    require(p.regulator.theta_lo >= -1.0, "regulator.theta_lo", "theta_lo >= -1 required");
    require(p.regulator.theta_lo < p.regulator.theta_hi, "regulator.theta_lo",
            "delta_theta > 0 required");
    require(p.regulator.eps_bar >= 0.0, "regulator.eps_bar", "eps_bar >= 0 required");

    res.perfect_correlation = std::abs(p.financial.rho) == 1.0;
    return res;
}

inline double sharpe(const ModelParams& p) {
    return (p.financial.mu - p.financial.r) / p.financial.sigma;
}

// Ratio of the underwriting profit margin to the investment profit margin:
// theta*l*sigma / ((mu - r)*eta). Underwriting is only worth holding when this
// ratio beats the correlation between the two risk sources.
inline double phi(double theta, const ModelParams& p) {
    return theta * p.insurance.l * p.financial.sigma /
           ((p.financial.mu - p.financial.r) * p.insurance.eta);
}

// Linear demand for coverage: 1 at theta_lo, 0 at theta_hi.
inline double demand(double theta, const ModelParams& p) {
    const RegulatorParams& reg = p.regulator;
    if (theta < reg.theta_lo) {
        throw std::domain_error("demand: theta = " + std::to_string(theta) +
                                " below lower bound theta_lo = " +
                                std::to_string(reg.theta_lo));
    }
    if (theta > reg.theta_hi) {
        throw std::domain_error("demand: theta = " + std::to_string(theta) +
                                " above upper bound theta_hi = " +
                                std::to_string(reg.theta_hi));
    }
    return (reg.theta_hi - theta) / p.delta_theta();
}

}  // namespace insmkt
