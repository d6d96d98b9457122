#pragma once

// Social welfare along the equilibrium path (consumer plus producer surplus
// of the linear demand and supply pair), the response of the equilibrium to
// the Sharpe ratio and to the friction intensity, and the welfare-maximizing
// friction intensity per point in time.
//
// Sign conventions for the comparative statics follow the correlation
// thresholds rho_bar_s and rho_lo_s. For the friction response of the
// loading: negative correlation raises it, positive correlation below
// rho_bar_s lowers it, and above rho_bar_s raises it again. Underwriting
// moves opposite to the loading, and the investment position always shrinks
// in magnitude as friction grows.
//
// The per-time optimal friction eps*(s) follows a four-way case split on
// rho. Two feasibility limits eps_hi_limit and eps_lo_limit guard the
// positive-market condition. The closed-form case table assumes both limits
// are negative; when one is not, the selected candidate is clamped to the
// feasible part of [0, eps_bar] and a warning is recorded.

#include "insmkt/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace insmkt {

inline double welfare_at(double s, double eps, const ModelParams& p) {
    const double k = kappa(eps, s, p);
    const double supply_floor = rho_margin(p) / k;  // loading where supply starts
    const double gap = p.regulator.theta_hi - supply_floor;
    return 0.5 * k * p.insurance.l * gap * gap * p.discount(s) /
           clearing_denominator(s, eps, p);
}

struct WelfarePath {
    std::vector<double> grid;
    std::vector<double> w_star;
    // Diagnostic split; the two surpluses sum to w_star.
    std::vector<double> consumer_surplus;
    std::vector<double> producer_surplus;
    std::optional<FrictionSchedule> eps_used;
};

// Welfare on the grid. Refuses non-positive regimes; cross-checks the direct
// formula against 0.5 * x* * (theta_hi - supply floor) at every point as an
// internal consistency guard.
inline WelfarePath welfare_path(const ModelParams& p,
                                const std::optional<FrictionSchedule>& eps,
                                const TimeGrid& grid) {
    auto eps_at = [&](double s) { return eps ? (*eps)(s) : 0.0; };
    const RegimeVerdict verdict = detail::classify_impl(p, eps_at, TimeGrid::uniform(p));
    if (verdict.regime == Regime::MarketFailure) {
        throw market_failure_error(*verdict.tau_f,
                                   "welfare_path: market failure from s = " +
                                       std::to_string(*verdict.tau_f));
    }
    if (verdict.regime == Regime::ZeroMarket) {
        throw std::runtime_error("welfare_path: zero market, no trade to evaluate");
    }

    WelfarePath out;
    out.eps_used = eps;
    out.grid.reserve(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double s = grid.at(i);
        const double e = eps_at(s);
        const double w = welfare_at(s, e, p);
        const double x = equilibrium_x(s, e, p);
        const double theta = equilibrium_theta(s, e, p);
        const double supply_floor = rho_margin(p) / kappa(e, s, p);
        const double via_quantity = 0.5 * x * (p.regulator.theta_hi - supply_floor);
        if (std::abs(w - via_quantity) > 1e-12 * std::max(1.0, std::abs(w))) {
            throw std::logic_error("welfare_path: surplus identity violated at s = " +
                                   std::to_string(s));
        }
        out.grid.push_back(s);
        out.w_star.push_back(w);
        out.consumer_surplus.push_back(0.5 * x * (p.regulator.theta_hi - theta));
        out.producer_surplus.push_back(0.5 * x * (theta - supply_floor));
    }
    return out;
}

// Correlation above which more friction raises the equilibrium loading again.
inline double rho_bar_threshold(double s, const ModelParams& p) {
    const double l = p.insurance.l;
    const double eta = p.insurance.eta;
    return sharpe(p) * (eta / l) / p.regulator.theta_hi *
           (1.0 + l * p.delta_theta() / (p.insurer.gamma * eta * eta) * p.discount(s));
}

// Correlation below which welfare grows with friction all the way to the cap.
inline double rho_lo_threshold(double s, const ModelParams& p) {
    const double b = p.regulator.theta_hi * (p.financial.sigma / (p.financial.mu - p.financial.r)) *
                     (p.insurance.l / p.insurance.eta);
    const double c = 1.0 + p.insurance.l * p.delta_theta() /
                               (p.insurer.gamma * p.insurance.eta * p.insurance.eta) *
                               p.discount(s);
    return 0.5 * (-b + std::sqrt(b * b + 8.0 * c));
}

// Feasibility limit on eps coming from the floor side of the positive-market
// condition. Negative means the condition never binds on [0, eps_bar].
inline double eps_hi_limit(double s, const ModelParams& p) {
    const double rho = p.financial.rho;
    const double inner = p.insurer.gamma * (1.0 - rho * rho) * p.insurance.eta *
                             p.insurance.eta / p.insurance.l +
                         rho_margin(p);
    const double lo = p.regulator.theta_lo;
    if (lo == 0.0) {
        // A zero floor restricts nothing when the diversification term is
        // nonnegative, and everything otherwise.
        return inner >= 0.0 ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
    }
    const double sig = p.financial.sigma;
    return p.insurer.gamma * sig * sig * (inner / lo - 1.0) * p.growth(s);
}

// Feasibility limit on eps coming from the cap side of the positive-market
// condition.
inline double eps_lo_limit(double s, const ModelParams& p) {
    const double sig = p.financial.sigma;
    return p.insurer.gamma * sig * sig *
           (rho_margin(p) / p.regulator.theta_hi - 1.0) * p.growth(s);
}

struct StaticsRow {
    std::string quantity;            // theta_star, x_star, y_star or w_star
    std::vector<int> analytic_sign;  // predicted derivative sign per grid point
    std::vector<double> numeric;     // central-difference estimate per grid point
    bool consistent = true;
};

struct SignReport {
    std::vector<double> grid;
    std::vector<StaticsRow> rows;
    bool all_consistent = true;
};

// Numeric estimates below this magnitude are treated as zero and must match
// an analytic zero prediction.
inline bool statics_point_consistent(int analytic, double numeric, double floor = 1e-9) {
    if (std::abs(numeric) <= floor) return analytic == 0;
    return (numeric > 0.0 ? 1 : -1) == analytic;
}

namespace detail {

inline void finalize_row(StaticsRow& row, SignReport& report) {
    for (std::size_t i = 0; i < row.numeric.size(); ++i) {
        if (!statics_point_consistent(row.analytic_sign[i], row.numeric[i])) {
            row.consistent = false;
        }
    }
    report.all_consistent = report.all_consistent && row.consistent;
    report.rows.push_back(std::move(row));
}

}  // namespace detail

// Response of the frictionless equilibrium to the Sharpe ratio, probed by
// bumping mu symmetrically. Requires a positive frictionless market away
// from perfect correlation.
inline SignReport sharpe_statics(const ModelParams& p, const TimeGrid& grid) {
    if (std::abs(p.financial.rho) == 1.0) {
        throw std::domain_error("sharpe_statics: |rho| = 1, closed forms do not apply");
    }
    if (classify(p, 0.0).regime != Regime::PositiveMarket) {
        throw std::runtime_error("sharpe_statics: positive market required");
    }

    const double h = 1e-5 * std::max(std::abs(p.financial.mu), 1e-3);
    ModelParams up = p;
    ModelParams dn = p;
    up.financial.mu += h;
    dn.financial.mu -= h;
    const double dsr = sharpe(up) - sharpe(dn);

    SignReport report;
    report.grid.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) report.grid[i] = grid.at(i);

    const int srho = num::sign(p.financial.rho);
    struct Spec {
        const char* name;
        int sign;
        double (*eval)(double, double, const ModelParams&);
    };
    const Spec specs[] = {
        {"theta_star", srho, &equilibrium_theta},
        {"x_star", -srho, &equilibrium_x},
        {"y_star", 1, &equilibrium_y},
        {"w_star", -srho, &welfare_at},
    };
    for (const Spec& spec : specs) {
        StaticsRow row;
        row.quantity = spec.name;
        row.analytic_sign.assign(grid.n, spec.sign);
        row.numeric.resize(grid.n);
        for (int i = 0; i < grid.n; ++i) {
            const double s = grid.at(i);
            row.numeric[i] = (spec.eval(s, 0.0, up) - spec.eval(s, 0.0, dn)) / dsr;
        }
        detail::finalize_row(row, report);
    }
    return report;
}

// Response of the equilibrium to the friction intensity around a base eps,
// probed by a symmetric bump of 1e-4 * eps_bar. Probes may step slightly
// below zero; the closed forms extend smoothly.
inline SignReport friction_statics(const ModelParams& p, double eps, const TimeGrid& grid) {
    if (std::abs(p.financial.rho) == 1.0) {
        throw std::domain_error("friction_statics: |rho| = 1, closed forms do not apply");
    }
    if (classify(p, eps).regime != Regime::PositiveMarket) {
        throw std::runtime_error("friction_statics: positive market required at the base eps");
    }

    const double h = 1e-4 * (p.regulator.eps_bar > 0.0 ? p.regulator.eps_bar : 1.0);
    const double rho = p.financial.rho;

    SignReport report;
    report.grid.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) report.grid[i] = grid.at(i);

    struct Spec {
        const char* name;
        double (*eval)(double, double, const ModelParams&);
    };
    const Spec specs[] = {
        {"theta_star", &equilibrium_theta},
        {"x_star", &equilibrium_x},
        {"y_star", &equilibrium_y},
    };
    for (const Spec& spec : specs) {
        StaticsRow row;
        row.quantity = spec.name;
        row.analytic_sign.resize(grid.n);
        row.numeric.resize(grid.n);
        for (int i = 0; i < grid.n; ++i) {
            const double s = grid.at(i);
            int theta_sign;
            if (rho == 0.0) {
                theta_sign = 0;
            } else if (rho < 0.0) {
                theta_sign = 1;
            } else {
                const double rb = rho_bar_threshold(s, p);
                theta_sign = rho == rb ? 0 : (rho < rb ? -1 : 1);
            }
            if (row.quantity == "theta_star") {
                row.analytic_sign[i] = theta_sign;
            } else if (row.quantity == "x_star") {
                row.analytic_sign[i] = -theta_sign;
            } else {
                row.analytic_sign[i] = -num::sign(equilibrium_y(s, eps, p));
            }
            row.numeric[i] = (spec.eval(s, eps + h, p) - spec.eval(s, eps - h, p)) / (2.0 * h);
        }
        detail::finalize_row(row, report);
    }
    return report;
}

struct OptimalRegulation {
    std::vector<double> grid;
    std::vector<double> eps_star;
    std::vector<double> rho_bar;
    std::vector<double> rho_lo;
    std::vector<int> case_tag;  // which branch of the case split applied, 1..4
    bool independent = false;   // rho == 0: welfare does not depend on eps
    bool constant_across_horizon = true;
    std::vector<std::string> warnings;
};

// Welfare-maximizing friction intensity at each grid time. Case split on the
// correlation:
//   1: rho < 0 or rho >= 2*rho_bar_s        -> eps* = 0
//   2: 0 < rho < rho_lo_s                   -> eps* = eps_bar
//   3: rho_lo_s <= rho < 2*rho_bar_s        -> better of the two endpoints
//   4: rho = 0                              -> welfare is eps-independent
// Feasibility fallbacks replace an endpoint by max(0, eps_lo_limit) or
// min(eps_bar, eps_hi_limit) when the corresponding limit is nonnegative; a
// case-3 endpoint that still violates the positive-market condition is
// excluded and noted.
inline OptimalRegulation optimal_epsilon(const ModelParams& p, const TimeGrid& grid) {
    if (std::abs(p.financial.rho) == 1.0) {
        throw std::domain_error("optimal_epsilon: |rho| = 1, closed forms do not apply");
    }
    const double rho = p.financial.rho;
    const double eb = p.regulator.eps_bar;

    OptimalRegulation out;
    out.independent = rho == 0.0;
    bool warned_hi = false;
    bool warned_lo = false;
    bool warned_infeasible = false;

    for (int i = 0; i < grid.n; ++i) {
        const double s = grid.at(i);
        const double rb = rho_bar_threshold(s, p);
        const double rl = rho_lo_threshold(s, p);
        const double lim_hi = eps_hi_limit(s, p);
        const double lim_lo = eps_lo_limit(s, p);

        double low_cand = 0.0;
        if (lim_lo >= 0.0) {
            low_cand = std::min(std::max(0.0, lim_lo), eb);
            if (!warned_lo) {
                out.warnings.push_back(
                    "eps_lo_limit is nonnegative from s = " + std::to_string(s) +
                    "; low endpoint clamped to max(0, eps_lo_limit)");
                warned_lo = true;
            }
        }
        double high_cand = eb;
        if (lim_hi >= 0.0) {
            high_cand = std::min(eb, lim_hi);
            if (!warned_hi) {
                out.warnings.push_back(
                    "eps_hi_limit is nonnegative from s = " + std::to_string(s) +
                    "; high endpoint clamped to min(eps_bar, eps_hi_limit)");
                warned_hi = true;
            }
        }

        int tag;
        double star;
        if (rho == 0.0) {
            tag = 4;
            star = 0.0;
        } else if (rho < 0.0 || rho >= 2.0 * rb) {
            tag = 1;
            star = low_cand;
        } else if (rho < rl) {
            tag = 2;
            star = high_cand;
        } else {
            tag = 3;
            const bool low_ok = positive_condition_at(s, low_cand, p);
            const bool high_ok = positive_condition_at(s, high_cand, p);
            if (low_ok && high_ok) {
                star = welfare_at(s, low_cand, p) >= welfare_at(s, high_cand, p) ? low_cand
                                                                                 : high_cand;
            } else if (low_ok || high_ok) {
                star = low_ok ? low_cand : high_cand;
                if (!warned_infeasible) {
                    out.warnings.push_back(
                        "an endpoint candidate violates the positive-market condition "
                        "near s = " +
                        std::to_string(s) + " and was excluded");
                    warned_infeasible = true;
                }
            } else {
                star = low_cand;
                if (!warned_infeasible) {
                    out.warnings.push_back(
                        "no endpoint candidate satisfies the positive-market condition "
                        "near s = " +
                        std::to_string(s));
                    warned_infeasible = true;
                }
            }
        }

        out.grid.push_back(s);
        out.eps_star.push_back(star);
        out.rho_bar.push_back(rb);
        out.rho_lo.push_back(rl);
        out.case_tag.push_back(tag);
        if (i > 0 && out.eps_star[i] != out.eps_star[i - 1]) {
            out.constant_across_horizon = false;
        }
    }
    return out;
}

}  // namespace insmkt
