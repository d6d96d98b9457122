#pragma once

// Numeric cross-checks that are independent of the closed-form derivations:
// a zoomed grid search for the pointwise objective, a bisection solver for
// the clearing loading, a finite-difference residual for the dynamic
// programming equation, and expected-utility evaluation both in closed
// Gaussian form and by Euler simulation of the wealth process.
//
// These exist to catch algebra errors in the strategy/equilibrium modules,
// so they deliberately re-derive nothing: the grid search only evaluates the
// objective, the clearing solver only intersects supply with demand, and the
// simulators integrate the SDE directly.

#include "insmkt/equilibrium.hpp"
#include "insmkt/model.hpp"
#include "insmkt/numerics.hpp"
#include "insmkt/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace insmkt {

struct GridSpec {
    double x_lo = 0.0;  // exposure is constrained to be nonnegative
    double x_hi = 10.0;
    double y_lo = -10.0;
    double y_hi = 10.0;
    int nx = 81;
    int ny = 81;
    int refine_rounds = 5;  // 10x zoom-ins after the initial scan
};

struct ArgmaxResult {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;  // objective value in the scaled-partials gauge
    double res_x = 0.0;  // final grid resolution per axis
    double res_y = 0.0;
};

// Search window big enough to contain the maximizer, sized from a Rayleigh
// bound on the quadratic part of the objective (smallest curvature eigenvalue
// against the gradient norm). Friction only adds curvature, so the
// frictionless bound covers every eps >= 0.
inline GridSpec default_grid_spec(double theta, double s, const ModelParams& p) {
    const double eta = p.insurance.eta;
    const double sig = p.financial.sigma;
    const double e2 = eta * eta;
    const double s2 = sig * sig;
    const double rho = p.financial.rho;
    const double disc_min =
        0.5 * (e2 + s2 - std::sqrt((e2 - s2) * (e2 - s2) + 4.0 * rho * rho * e2 * s2));
    const double grad = std::hypot(theta * p.insurance.l, p.financial.mu - p.financial.r);
    const double bound =
        1.5 * grad * p.discount(s) / (p.insurer.gamma * disc_min) + 1.0;
    GridSpec spec;
    spec.x_hi = bound;
    spec.y_lo = -bound;
    spec.y_hi = bound;
    return spec;
}

// Exhaustive maximization of the pointwise objective over the window, with
// refine_rounds successive 10x zoom-ins around the incumbent. Windows slide
// but never leave the original range; an incumbent still pinned to the
// window edge after the final round (other than the x = 0 constraint) means
// the range was too small to bracket the maximizer.
inline ArgmaxResult grid_argmax(double theta, double s, double eps, const ModelParams& p,
                                const GridSpec& spec) {
    if (spec.nx < 3 || spec.ny < 3) {
        throw std::invalid_argument("grid_argmax: nx and ny must be at least 3");
    }
    if (spec.x_lo < 0.0) {
        throw std::invalid_argument("grid_argmax: x_lo must be >= 0");
    }
    if (!(spec.x_hi > spec.x_lo) || !(spec.y_hi > spec.y_lo)) {
        throw std::invalid_argument("grid_argmax: empty search window");
    }

    const ValuePartials v = scaled_value_partials(s, 0.0, p);
    double xlo = spec.x_lo, xhi = spec.x_hi;
    double ylo = spec.y_lo, yhi = spec.y_hi;
    double bx = xlo, by = ylo, bv = 0.0;

    for (int round = 0; round <= spec.refine_rounds; ++round) {
        int bi = 0, bj = 0;
        bv = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < spec.nx; ++i) {
            const double x = xlo + (xhi - xlo) * i / (spec.nx - 1);
            for (int j = 0; j < spec.ny; ++j) {
                const double y = ylo + (yhi - ylo) * j / (spec.ny - 1);
                const double val = hjb_integrand(x, y, theta, 0.0, v, p, eps);
                if (val > bv) {
                    bv = val;
                    bi = i;
                    bj = j;
                    bx = x;
                    by = y;
                }
            }
        }
        if (round == spec.refine_rounds) {
            const bool x_pinned = (bi == 0 && xlo > 0.0) || bi == spec.nx - 1;
            const bool y_pinned = bj == 0 || bj == spec.ny - 1;
            if (x_pinned || y_pinned) {
                throw std::runtime_error(
                    "grid_argmax: maximizer pinned to the search boundary at x = " +
                    std::to_string(bx) + ", y = " + std::to_string(by) +
                    ", range too small");
            }
            break;
        }
        const double wx = (xhi - xlo) / 10.0;
        const double wy = (yhi - ylo) / 10.0;
        xlo = std::min(std::max(bx - 0.5 * wx, spec.x_lo), spec.x_hi - wx);
        xhi = xlo + wx;
        ylo = std::min(std::max(by - 0.5 * wy, spec.y_lo), spec.y_hi - wy);
        yhi = ylo + wy;
    }

    ArgmaxResult res;
    res.x = bx;
    res.y = by;
    res.value = bv;
    res.res_x = (xhi - xlo) / (spec.nx - 1);
    res.res_y = (yhi - ylo) / (spec.ny - 1);
    return res;
}

// Clearing loading found by intersecting the supply map (the optimizer's
// exposure as a function of the loading) with the demand line, by bisection
// on [theta_lo, theta_hi]. Knows nothing about the closed-form equilibrium.
inline double numeric_clearing(double s, double eps, const ModelParams& p) {
    auto gap = [&](double theta) {
        return optimal_point_frictional(theta, s, eps, p).x_star - demand(theta, p);
    };
    const double lo = p.regulator.theta_lo;
    const double hi = p.regulator.theta_hi;
    const double glo = gap(lo);
    const double ghi = gap(hi);
    if (glo > 0.0) {
        throw std::runtime_error(
            "numeric_clearing: excess supply already at theta_lo (s = " + std::to_string(s) +
            "), regime contradicts a positive market");
    }
    if (ghi < 0.0) {
        throw std::runtime_error(
            "numeric_clearing: excess demand remains at theta_hi (s = " + std::to_string(s) +
            "), regime contradicts a positive market");
    }
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    return num::bisect(gap, lo, hi, 1e-12);
}

struct FdSteps {
    double h_m = 1e-4;
    double h_t = 0.0;  // 0 selects the default 1e-4 * (T - t0)
};

struct ResidualReport {
    double absolute = 0.0;
    double relative = 0.0;  // absolute scaled by |v_t|
    double v_t = 0.0;
};

// Central finite-difference check that the value function satisfies the
// dynamic programming equation at (t, m). loading_path and the friction
// schedule must evaluate slightly outside [t0, T] since the stencil reaches
// past t by h_t.
inline ResidualReport hjb_residual(double t, double m,
                                   const std::function<double(double)>& loading_path,
                                   const std::optional<FrictionSchedule>& eps_path,
                                   const ModelParams& p, FdSteps fd = {},
                                   int quad_points = 2001) {
    const double h_m = fd.h_m;
    const double h_t = fd.h_t > 0.0 ? fd.h_t : 1e-4 * (p.insurer.T - p.insurer.t0);

    auto V = [&](double tt, double mm) {
        return value_function(tt, mm, loading_path, eps_path, p, quad_points);
    };
    const double v00 = V(t, m);
    const double v_t = (V(t + h_t, m) - V(t - h_t, m)) / (2.0 * h_t);
    const double v_m = (V(t, m + h_m) - V(t, m - h_m)) / (2.0 * h_m);
    const double v_mm = (V(t, m + h_m) - 2.0 * v00 + V(t, m - h_m)) / (h_m * h_m);

    const double eps = eps_path ? (*eps_path)(t) : 0.0;
    const double theta = loading_path(t);
    const StrategyPoint sp = optimal_point_frictional(theta, t, eps, p);
    const double resid =
        v_t + hjb_integrand(sp.x_star, sp.y_star, theta, m, {0.0, v_m, v_mm}, p, eps);

    ResidualReport rep;
    rep.absolute = std::abs(resid);
    rep.v_t = v_t;
    rep.relative = rep.absolute / std::max(std::abs(v_t), 1e-300);
    return rep;
}

struct SimSpec {
    long n_paths = 100000;
    int n_steps = 200;
    std::uint64_t seed = 42;
};

struct UtilityEstimate {
    double mean = 0.0;
    double std_error = 0.0;                                       // 0 for the closed form
    double incr_corr = std::numeric_limits<double>::quiet_NaN();  // simulation only
};

using ControlFn = std::function<std::pair<double, double>(double)>;  // s -> (x, y)

// Expected utility of terminal wealth under deterministic controls, in
// closed Gaussian form: wealth at T is normal with a mean and variance given
// by discounted integrals of the drift and squared volatility.
inline UtilityEstimate expected_utility_analytic(const ControlFn& controls,
                                                 const std::function<double(double)>& loading_path,
                                                 const std::optional<FrictionSchedule>& eps_path,
                                                 const ModelParams& p, double t, double m,
                                                 int quad_points = 2001) {
    const double excess = p.financial.mu - p.financial.r;
    const double l = p.insurance.l;
    const double eta = p.insurance.eta;
    const double sig = p.financial.sigma;
    const double rho = p.financial.rho;

    auto drift = [&](double s) {
        const auto [x, y] = controls(s);
        const double eps = eps_path ? (*eps_path)(s) : 0.0;
        return p.growth(s) * (x * loading_path(s) * l + y * excess - 0.5 * y * y * eps);
    };
    auto variance_rate = [&](double s) {
        const auto [x, y] = controls(s);
        const double gr = p.growth(s);
        return gr * gr *
               (x * x * eta * eta + 2.0 * rho * x * eta * y * sig + y * y * sig * sig);
    };
    const double T = p.insurer.T;
    const double mean_wealth = m * p.growth(t) + num::simpson(drift, t, T, quad_points);
    const double var_wealth = num::simpson(variance_rate, t, T, quad_points);
    const double g = p.insurer.gamma;

    UtilityEstimate est;
    est.mean = -std::exp(-g * mean_wealth + 0.5 * g * g * var_wealth) / g;
    est.std_error = 0.0;
    return est;
}

// Monte Carlo estimate of the same expectation by Euler integration of the
// wealth SDE from (t, m). Each path gets its own engine seeded from
// (seed, path index), so results are reproducible and indifferent to path
// ordering.
inline UtilityEstimate expected_utility_mc(const ControlFn& controls,
                                           const std::function<double(double)>& loading_path,
                                           const std::optional<FrictionSchedule>& eps_path,
                                           const ModelParams& p, double t, double m0,
                                           const SimSpec& sim) {
    if (sim.n_paths < 1 || sim.n_steps < 1) {
        throw std::invalid_argument("expected_utility_mc: n_paths and n_steps must be >= 1");
    }
    const double excess = p.financial.mu - p.financial.r;
    const double l = p.insurance.l;
    const double eta = p.insurance.eta;
    const double sig = p.financial.sigma;
    const double rho = p.financial.rho;
    const double g = p.insurer.gamma;
    const double r = p.financial.r;
    const double T = p.insurer.T;
    const double dt = (T - t) / sim.n_steps;
    const double sqdt = std::sqrt(dt);
    const double orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    double sum_u = 0.0, sum_u2 = 0.0;
    double sum_ii = 0.0, sum_ss = 0.0, sum_is = 0.0;

    for (long path = 0; path < sim.n_paths; ++path) {
        std::seed_seq seq{static_cast<std::uint32_t>(sim.seed),
                          static_cast<std::uint32_t>(sim.seed >> 32),
                          static_cast<std::uint32_t>(path),
                          static_cast<std::uint32_t>(static_cast<std::uint64_t>(path) >> 32)};
        std::mt19937_64 eng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);

        double m = m0;
        for (int k = 0; k < sim.n_steps; ++k) {
            const double s = t + k * dt;
            const auto [x, y] = controls(s);
            const double eps = eps_path ? (*eps_path)(s) : 0.0;
            const double z1 = normal(eng);
            const double z2 = normal(eng);
            const double dwi = sqdt * z1;
            const double dws = sqdt * (rho * z1 + orth * z2);
            m += (x * loading_path(s) * l + y * excess - 0.5 * y * y * eps + m * r) * dt +
                 x * eta * dwi + y * sig * dws;
            sum_ii += dwi * dwi;
            sum_ss += dws * dws;
            sum_is += dwi * dws;
        }
        const double u = -std::exp(-g * m) / g;
        sum_u += u;
        sum_u2 += u * u;
    }

    const double n = static_cast<double>(sim.n_paths);
    UtilityEstimate est;
    est.mean = sum_u / n;
    if (sim.n_paths > 1) {
        const double var = std::max(0.0, (sum_u2 - n * est.mean * est.mean) / (n - 1.0));
        est.std_error = std::sqrt(var / n);
    }
    est.incr_corr = sum_is / std::sqrt(sum_ii * sum_ss);
    return est;
}

// Multiplier on the x >= 0 constraint in the scaled-partials gauge.
// Nonnegative exactly when holding zero exposure is optimal at (theta, s).
inline double kkt_multiplier(double theta, double s, double eps, const ModelParams& p) {
    const double sig = p.financial.sigma;
    const double excess = p.financial.mu - p.financial.r;
    const double D = p.discount(s) / p.insurer.gamma;  // -v_m / v_mm
    const double v_m = p.growth(s);
    return v_m * (p.financial.rho * p.insurance.eta * sig * excess / (sig * sig + D * eps) -
                  theta * p.insurance.l);
}

struct OracleCheck {
    std::string name;
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct OracleReport {
    std::vector<OracleCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks) {
            if (!c.pass) return false;
        }
        return true;
    }
};

// The full cross-check battery for one parameter set. Path-level checks run
// only in a positive market; the strategy and utility checks run under any
// regime against a constant loading path.
inline OracleReport run_verification(const ModelParams& p, std::optional<double> eps_const,
                                     int grid_points, const SimSpec& sim) {
    OracleReport report;
    auto add = [&report](const std::string& name, double observed, double tolerance,
                         const std::string& detail = "") {
        report.checks.push_back({name, observed, tolerance, observed <= tolerance, detail});
    };
    auto skip = [&report](const std::string& name, const std::string& why) {
        report.checks.push_back({name, 0.0, 0.0, true, "skipped: " + why});
    };

    const double eps = eps_const.value_or(0.0);
    const std::optional<FrictionSchedule> eps_path =
        eps_const ? std::optional<FrictionSchedule>(FrictionSchedule::constant(eps))
                  : std::nullopt;
    const TimeGrid grid = TimeGrid::uniform(p, grid_points);
    const RegimeVerdict verdict = classify(p, eps);
    const bool positive = verdict.regime == Regime::PositiveMarket;

    if (positive) {
        double worst = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            const double s = grid.at(i);
            const double theta = equilibrium_theta(s, eps, p);
            const double gap =
                optimal_point_frictional(theta, s, eps, p).x_star - demand(theta, p);
            worst = std::max(worst, std::abs(gap));
        }
        add("market-clearing", worst, 1e-12, "max |supply - demand| at theta*");

        double worst_theta = 0.0;
        const int stride = std::max(1, grid.n / 40);
        for (int i = 0; i < grid.n; i += stride) {
            const double s = grid.at(i);
            worst_theta = std::max(
                worst_theta, std::abs(numeric_clearing(s, eps, p) - equilibrium_theta(s, eps, p)));
        }
        add("numeric-clearing", worst_theta, 1e-10, "bisection loading vs closed form");
    } else {
        skip("market-clearing", std::string("regime is ") + to_string(verdict.regime));
        skip("numeric-clearing", std::string("regime is ") + to_string(verdict.regime));
    }

    std::mt19937_64 rng(20240517u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * u01(rng); };

    {
        double worst = 0.0;
        for (int c = 0; c < 25; ++c) {
            const double theta = uniform(p.regulator.theta_lo, p.regulator.theta_hi);
            const double s = uniform(p.insurer.t0, p.insurer.T);
            const StrategyPoint sp = optimal_point_frictional(theta, s, eps, p);
            const ArgmaxResult am =
                grid_argmax(theta, s, eps, p, default_grid_spec(theta, s, p));
            worst = std::max({worst, std::abs(am.x - sp.x_star), std::abs(am.y - sp.y_star)});
        }
        add("grid-argmax", worst, 1e-4, "grid search vs closed-form controls, 25 draws");
    }

    const std::function<double(double)> loading_path =
        positive ? std::function<double(double)>(
                       [&p, eps](double s) { return equilibrium_theta(s, eps, p); })
                 : std::function<double(double)>(
                       [&p](double) { return p.regulator.theta_hi; });

    {
        const double span = p.insurer.T - p.insurer.t0;
        const FdSteps fd{2e-5, 2e-5 * span};
        double worst = 0.0;
        for (int c = 0; c < 5; ++c) {
            const double t = uniform(p.insurer.t0 + 0.02 * span, p.insurer.T - 0.02 * span);
            const double m = uniform(-0.5, 0.5);
            worst = std::max(
                worst, hjb_residual(t, m, loading_path, eps_path, p, fd, grid_points).relative);
        }
        add("hjb-residual", worst, 1e-6, "relative to |v_t|, 5 draws");
    }

    ControlFn optimal_controls = [&p, &loading_path, eps](double s) {
        const StrategyPoint sp = optimal_point_frictional(loading_path(s), s, eps, p);
        return std::make_pair(sp.x_star, sp.y_star);
    };

    const double t0 = p.insurer.t0;
    const double m0 = p.insurer.m0;
    const UtilityEstimate analytic = expected_utility_analytic(
        optimal_controls, loading_path, eps_path, p, t0, m0, grid_points);
    const double v0 = value_function(t0, m0, loading_path, eps_path, p, grid_points);
    add("analytic-utility", std::abs(analytic.mean - v0) / std::abs(v0), 1e-8,
        "closed Gaussian form vs value function");

    {
        // Simulate over a window short enough that exp(-gamma m_T) has a
        // usable signal-to-noise ratio; the comparison target is the closed
        // form started at the same point.
        const double tw = std::max(t0, p.insurer.T - 2.0);
        const UtilityEstimate window_analytic = expected_utility_analytic(
            optimal_controls, loading_path, eps_path, p, tw, m0, grid_points);
        const UtilityEstimate mc = expected_utility_mc(optimal_controls, loading_path,
                                                       eps_path, p, tw, m0, sim);
        add("mc-utility", std::abs(mc.mean - window_analytic.mean), 3.0 * mc.std_error,
            "Euler simulation vs closed form, same start point");
        const double corr_tol =
            3.0 / std::sqrt(static_cast<double>(sim.n_paths) * sim.n_steps);
        add("increment-correlation", std::abs(mc.incr_corr - p.financial.rho), corr_tol,
            "sample correlation of the simulated shocks");
    }

    {
        int beats = 0;
        for (int c = 0; c < 10; ++c) {
            const double ax = uniform(-0.3, 0.3);
            const double bx = uniform(-0.2, 0.2);
            const double ay = uniform(-0.3, 0.3);
            const double by = uniform(-0.2, 0.2);
            ControlFn perturbed = [&, ax, bx, ay, by](double s) {
                auto [x, y] = optimal_controls(s);
                return std::make_pair(std::max(0.0, x * (1.0 + ax) + bx), y * (1.0 + ay) + by);
            };
            const UtilityEstimate pert = expected_utility_analytic(
                perturbed, loading_path, eps_path, p, t0, m0, grid_points);
            if (pert.mean > analytic.mean + 1e-9 * std::abs(analytic.mean)) ++beats;
        }
        add("perturbed-strategies", static_cast<double>(beats), 0.0,
            "perturbations that beat the optimum, out of 10");
    }

    return report;
}

}  // namespace insmkt
