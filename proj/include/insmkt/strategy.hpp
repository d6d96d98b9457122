#pragma once

// Closed-form optimal underwriting and investment controls for an insurer
// with exponential utility facing an exogenous loading path, optionally with
// a quadratic friction charge on risky investment, plus the value function
// those controls produce and the pointwise objective they maximize.
//
// Conventions: s is calendar time in [t0, T], tau = T - s, and every control
// scales with e^{-r*tau}. kappa(eps, s) >= 1 is the friction multiplier.
// kappa = 1 recovers the frictionless problem, and the frictionless entry
// points evaluate the frictional ones at eps = 0, so the two agree bit for
// bit by construction.

#include "insmkt/model.hpp"
#include "insmkt/numerics.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace insmkt {

enum class Branch { UnderwritingActive, UnderwritingZero };

struct StrategyPoint {
    double x_star;         // underwriting exposure, >= 0 by construction
    double y_star;         // risky asset position, either sign
    double exponent_rate;  // time-s rate accumulated inside the value exponent
    Branch branch;
};

// Deterministic friction intensity schedule s -> eps_s. The canonical
// instance is a constant; any bounded measurable function works for the
// quadrature-based operations.
struct FrictionSchedule {
    std::function<double(double)> eps_fn;

    double operator()(double s) const { return eps_fn(s); }

    static FrictionSchedule constant(double eps) {
        return {[eps](double) { return eps; }};
    }
};

// kappa = 1 + eps/(gamma*sigma^2) * e^{-r(T-s)}: how strongly the friction
// tilts the tradeoff away from investment and toward underwriting.
inline double kappa(double eps, double s, const ModelParams& p) {
    const double g = p.insurer.gamma;
    const double sig = p.financial.sigma;
    return 1.0 + eps / (g * sig * sig) * p.discount(s);
}

// Loading at and below which underwriting shuts off at time s, which is where
// kappa * phi(theta) falls to rho.
inline double underwriting_threshold_theta(double eps, double s, const ModelParams& p) {
    return p.financial.rho * (p.financial.mu - p.financial.r) * p.insurance.eta /
           (kappa(eps, s, p) * p.insurance.l * p.financial.sigma);
}

inline StrategyPoint optimal_point_frictional(double theta, double s, double eps,
                                              const ModelParams& p) {
    if (std::abs(p.financial.rho) == 1.0) {
        throw std::domain_error(
            "optimal_point: |rho| = 1, use the perfect-correlation branch");
    }
    const double l = p.insurance.l;
    const double eta = p.insurance.eta;
    const double sig = p.financial.sigma;
    const double rho = p.financial.rho;
    const double g = p.insurer.gamma;
    const double excess = p.financial.mu - p.financial.r;
    const double k = kappa(eps, s, p);
    const double disc = p.discount(s);

    if (k * phi(theta, p) > rho) {
        const double kr = k - rho * rho;
        const double x = (k * theta * l * sig - rho * excess * eta) * disc /
                         (g * kr * eta * eta * sig);
        const double y = (excess * eta - rho * theta * l * sig) * disc /
                         (g * kr * eta * sig * sig);
        const double rate =
            (k * theta * theta * l * l * sig * sig -
             2.0 * rho * theta * l * excess * eta * sig + excess * excess * eta * eta) /
            (2.0 * kr * eta * eta * sig * sig);
        return {x, y, rate, Branch::UnderwritingActive};
    }

    // Zero branch, including the tie. The friction shows up undiscounted in
    // the denominator of the pure investment position.
    const double y = excess / (g * sig * sig * p.growth(s) + eps);
    const double rate = excess * excess / (2.0 * k * sig * sig);
    return {0.0, y, rate, Branch::UnderwritingZero};
}

inline StrategyPoint optimal_point(double theta, double s, const ModelParams& p) {
    return optimal_point_frictional(theta, s, 0.0, p);
}

struct ValuePartials {
    double v_t;   // consumed only by the residual oracle
    double v_m;   // positive
    double v_mm;  // negative
};

// The drift-vs-variance expression the insurer maximizes pointwise inside the
// dynamic program:
//   v_m*(x*theta*l + y*(mu-r) - y^2*eps/2 + m*r)
//     + v_mm*(x^2*eta^2 + 2*rho*x*eta*y*sigma + y^2*sigma^2)/2
// eps = 0 gives the frictionless objective.
inline double hjb_integrand(double x, double y, double theta, double m,
                            const ValuePartials& v, const ModelParams& p, double eps) {
    const double drift = x * theta * p.insurance.l +
                         y * (p.financial.mu - p.financial.r) - 0.5 * y * y * eps +
                         m * p.financial.r;
    const double eta = p.insurance.eta;
    const double sig = p.financial.sigma;
    const double quad = x * x * eta * eta +
                        2.0 * p.financial.rho * x * eta * y * sig + y * y * sig * sig;
    return v.v_m * drift + 0.5 * v.v_mm * quad;
}

// Closed-form wealth partials of the value function at (s, m), up to the
// positive factor exp(-integral of exponent rates over [s, T]). Dropping that
// factor rescales the objective uniformly, so argmax locations and sign
// diagnostics are unchanged. v_t is not available in this gauge and is set
// to zero.
inline ValuePartials scaled_value_partials(double s, double m, const ModelParams& p) {
    const double gr = p.growth(s);
    const double common = std::exp(-p.insurer.gamma * m * gr);
    return {0.0, gr * common, -p.insurer.gamma * gr * gr * common};
}

// Value of running the optimal controls from (t, m) against a deterministic
// loading path and friction schedule:
//   V(t, m) = -(1/gamma) exp{-gamma*m*e^{r(T-t)} - int_t^T rate(s) ds}.
// The integral is composite Simpson with quad_points nodes on [t, T].
inline double value_function(double t, double m,
                             const std::function<double(double)>& loading_path,
                             const std::optional<FrictionSchedule>& eps_path,
                             const ModelParams& p, int quad_points = 2001) {
    auto rate = [&](double s) {
        const double eps = eps_path ? (*eps_path)(s) : 0.0;
        return optimal_point_frictional(loading_path(s), s, eps, p).exponent_rate;
    };
    const double integral = num::simpson(rate, t, p.insurer.T, quad_points);
    const double g = p.insurer.gamma;
    return -std::exp(-g * m * p.growth(t) - integral) / g;
}

}  // namespace insmkt
