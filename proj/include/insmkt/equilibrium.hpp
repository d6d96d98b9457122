#pragma once

// Market-level closed forms: regime classification, equilibrium loading and
// quantity paths, the stopping times tau_f (failure onset) and tau_n (first
// negative loading), and the perfect-correlation special case.
//
// The clearing logic behind the regimes: the insurer's supply line x*(theta)
// has to cross the demand line d(theta) at a loading inside
// [theta_lo, theta_hi]. A cap theta_hi below the correlated investment margin
// keeps supply at zero (zero market). A floor theta_lo above the would-be
// clearing loading leaves excess supply that cannot be priced away, and the
// first time that happens is tau_f (market failure).

#include "insmkt/model.hpp"
#include "insmkt/numerics.hpp"
#include "insmkt/strategy.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace insmkt {

enum class Regime { PositiveMarket, ZeroMarket, MarketFailure };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::PositiveMarket: return "PositiveMarket";
        case Regime::ZeroMarket: return "ZeroMarket";
        case Regime::MarketFailure: return "MarketFailure";
    }
    return "unknown";
}

struct TimeGrid {
    double t0 = 0.0;
    double T = 50.0;
    int n = 2001;

    double at(int i) const {
        if (i <= 0) return t0;
        if (i >= n - 1) return T;
        return t0 + (T - t0) * static_cast<double>(i) / (n - 1);
    }

    static TimeGrid uniform(const ModelParams& p, int n = 2001) {
        return {p.insurer.t0, p.insurer.T, n < 2 ? 2 : n};
    }
};

struct RegimeVerdict {
    Regime regime = Regime::PositiveMarket;
    std::optional<double> tau_f;    // onset of failure, present iff MarketFailure
    std::string binding_condition;  // which inequality decided the verdict
};

struct EquilibriumPath {
    std::vector<double> grid;
    std::vector<double> theta_star;
    std::vector<double> x_star;
    std::vector<double> y_star;
    std::optional<double> tau_n;               // first zero crossing of theta*
    std::optional<FrictionSchedule> friction;  // schedule the path was built under
    Regime regime = Regime::PositiveMarket;
};

class market_failure_error : public std::runtime_error {
public:
    double tau_f;
    market_failure_error(double tau, const std::string& msg)
        : std::runtime_error(msg), tau_f(tau) {}
};

// rho*(mu-r)*eta/(sigma*l): the loading at which the underwriting margin
// exactly offsets the correlated share of the investment margin. Supply
// starts at this loading when kappa = 1.
inline double rho_margin(const ModelParams& p) {
    return p.financial.rho * sharpe(p) * p.insurance.eta / p.insurance.l;
}

inline double clearing_denominator(double s, double eps, const ModelParams& p) {
    const double k = kappa(eps, s, p);
    const double rho = p.financial.rho;
    const double eta = p.insurance.eta;
    return p.insurer.gamma * (k - rho * rho) * eta * eta +
           k * p.insurance.l * p.delta_theta() * p.discount(s);
}

// Pointwise positive-market closed forms. They are raw evaluators: regime
// checks live in classify() and the path builders, and derivative probes are
// allowed to call these slightly outside [0, eps_bar].
inline double equilibrium_theta(double s, double eps, const ModelParams& p) {
    const double k = kappa(eps, s, p);
    const double rho = p.financial.rho;
    const double eta = p.insurance.eta;
    const double num =
        p.insurer.gamma * (k - rho * rho) * eta * eta * p.regulator.theta_hi +
        rho * sharpe(p) * eta * p.delta_theta() * p.discount(s);
    return num / clearing_denominator(s, eps, p);
}

inline double equilibrium_x(double s, double eps, const ModelParams& p) {
    const double k = kappa(eps, s, p);
    const double num = (k * p.regulator.theta_hi * p.insurance.l -
                        p.financial.rho * sharpe(p) * p.insurance.eta) *
                       p.discount(s);
    return num / clearing_denominator(s, eps, p);
}

inline double equilibrium_y(double s, double eps, const ModelParams& p) {
    const double l = p.insurance.l;
    const double eta = p.insurance.eta;
    const double sig = p.financial.sigma;
    const double excess = p.financial.mu - p.financial.r;
    const double disc = p.discount(s);
    const double bracket =
        eta * eta / sig * (sharpe(p) - p.financial.rho * (l / eta) * p.regulator.theta_hi) +
        excess / (p.insurer.gamma * sig * sig) * l * p.delta_theta() * disc;
    return bracket * disc / clearing_denominator(s, eps, p);
}

inline bool zero_condition_at(double s, double eps, const ModelParams& p) {
    return p.regulator.theta_hi <= rho_margin(p) / kappa(eps, s, p);
}

inline bool positive_condition_at(double s, double eps, const ModelParams& p) {
    const double k = kappa(eps, s, p);
    const double rho = p.financial.rho;
    const double eta = p.insurance.eta;
    const double diversification =
        p.insurer.gamma * (1.0 - rho * rho) * eta * eta / p.insurance.l;
    return p.regulator.theta_hi > rho_margin(p) / k &&
           p.regulator.theta_lo <= (diversification + rho_margin(p)) / k;
}

// theta_lo above the time-s clearing floor: demand saturates at the floor
// loading and supply still exceeds it, so no clearing loading exists.
inline bool failure_inequality_at(double s, double eps, const ModelParams& p) {
    const double k = kappa(eps, s, p);
    const double rho = p.financial.rho;
    const double eta = p.insurance.eta;
    const double bound = (p.insurer.gamma * (1.0 - rho * rho) * eta * eta /
                              p.insurance.l * p.growth(s) +
                          rho_margin(p)) /
                         k;
    return p.regulator.theta_lo > bound;
}

namespace detail {

template <class EpsFn>
RegimeVerdict classify_impl(const ModelParams& p, EpsFn&& eps_at, const TimeGrid& grid) {
    if (std::abs(p.financial.rho) == 1.0) {
        throw std::domain_error("classify: |rho| = 1, use perfect_correlation_path");
    }
    bool all_zero = true;
    bool all_pos = true;
    for (int i = 0; i < grid.n; ++i) {
        const double s = grid.at(i);
        const double e = eps_at(s);
        all_zero = all_zero && zero_condition_at(s, e, p);
        all_pos = all_pos && positive_condition_at(s, e, p);
        if (!all_zero && !all_pos) break;
    }
    if (all_zero) {
        return {Regime::ZeroMarket, std::nullopt,
                "theta_hi <= rho*(mu-r)*eta/(kappa*l*sigma) at every s"};
    }
    if (all_pos) {
        return {Regime::PositiveMarket, std::nullopt,
                "supply crosses demand inside [theta_lo, theta_hi] at every s"};
    }

    // Market failure. Locate the onset: first time the floor loading exceeds
    // the clearing bound, refined by bisection on the same inequality.
    int first = -1;
    for (int i = 0; i < grid.n; ++i) {
        if (failure_inequality_at(grid.at(i), eps_at(grid.at(i)), p)) {
            first = i;
            break;
        }
    }
    if (first >= 0) {
        double tau = grid.t0;
        if (first > 0) {
            auto pred = [&](double s) { return failure_inequality_at(s, eps_at(s), p); };
            tau = num::bisect_first_true(pred, grid.at(first - 1), grid.at(first), 1e-10);
        }
        return {Regime::MarketFailure, tau,
                "theta_lo > (gamma*(1-rho^2)*(eta^2/l)*e^{r(T-s)} + "
                "rho*(mu-r)*eta/(sigma*l))/kappa from s = tau_f onward"};
    }

    // Mixed horizon: the pointwise regime flips between zero and positive
    // without a floor violation. Report failure where the positive condition
    // first breaks.
    first = 0;
    while (first < grid.n && positive_condition_at(grid.at(first), eps_at(grid.at(first)), p)) {
        ++first;
    }
    double tau = grid.t0;
    if (first > 0 && first < grid.n) {
        auto pred = [&](double s) { return !positive_condition_at(s, eps_at(s), p); };
        tau = num::bisect_first_true(pred, grid.at(first - 1), grid.at(first), 1e-10);
    } else if (first >= grid.n) {
        // positive holds on the scan grid but zero never did and some probe
        // failed; fall back to the horizon start
        tau = grid.t0;
    }
    return {Regime::MarketFailure, tau,
            "regime is not uniform across the horizon (positive-market condition "
            "fails from s = tau_f, without a floor-price bracket)"};
}

}  // namespace detail

// Horizon-wide classification for a constant friction intensity. eps = 0
// classifies the frictionless market.
inline RegimeVerdict classify(const ModelParams& p, double eps = 0.0) {
    return detail::classify_impl(
        p, [eps](double) { return eps; }, TimeGrid::uniform(p));
}

// First time the frictionless equilibrium loading turns negative, if it ever
// does. Only a negative correlation can produce one.
inline std::optional<double> negative_loading_time(const ModelParams& p) {
    if (std::abs(p.financial.rho) == 1.0) {
        throw std::domain_error("negative_loading_time: |rho| = 1, use perfect_correlation_path");
    }
    const double rho = p.financial.rho;
    if (rho >= 0.0) return std::nullopt;

    // theta*(s) < 0 iff rho/(1-rho^2) + K e^{r(T-s)} < 0 with the positive
    // constant K below; the left side decreases in s, so the first crossing
    // is a plain root.
    const double K = p.insurer.gamma * p.financial.sigma /
                     (p.financial.mu - p.financial.r) * p.insurance.eta *
                     p.regulator.theta_hi / p.delta_theta();
    auto f = [&](double s) { return rho / (1.0 - rho * rho) + K * p.growth(s); };
    const double t0 = p.insurer.t0;
    const double T = p.insurer.T;
    if (f(T) >= 0.0) return std::nullopt;
    if (f(t0) < 0.0) return t0;
    return num::bisect(f, t0, T, 1e-10);
}

// Equilibrium path on the given grid. Throws market_failure_error (carrying
// tau_f) when no clearing loading exists somewhere on the horizon.
inline EquilibriumPath equilibrium_path(const ModelParams& p,
                                        const std::optional<FrictionSchedule>& eps,
                                        const TimeGrid& grid) {
    auto eps_at = [&](double s) { return eps ? (*eps)(s) : 0.0; };
    const RegimeVerdict verdict = detail::classify_impl(p, eps_at, TimeGrid::uniform(p));
    if (verdict.regime == Regime::MarketFailure) {
        throw market_failure_error(
            *verdict.tau_f,
            "equilibrium_path: market failure from s = " + std::to_string(*verdict.tau_f) +
                ", no clearing loading inside [theta_lo, theta_hi]");
    }

    EquilibriumPath out;
    out.regime = verdict.regime;
    out.friction = eps;
    out.grid.reserve(grid.n);
    out.theta_star.reserve(grid.n);
    out.x_star.reserve(grid.n);
    out.y_star.reserve(grid.n);

    for (int i = 0; i < grid.n; ++i) {
        const double s = grid.at(i);
        const double e = eps_at(s);
        out.grid.push_back(s);
        if (verdict.regime == Regime::ZeroMarket) {
            out.theta_star.push_back(p.regulator.theta_hi);
            out.x_star.push_back(0.0);
            out.y_star.push_back((p.financial.mu - p.financial.r) /
                                 (p.insurer.gamma * p.financial.sigma *
                                      p.financial.sigma * p.growth(s) +
                                  e));
        } else {
            out.theta_star.push_back(equilibrium_theta(s, e, p));
            out.x_star.push_back(equilibrium_x(s, e, p));
            out.y_star.push_back(equilibrium_y(s, e, p));
        }
    }

    if (verdict.regime == Regime::PositiveMarket) {
        if (out.theta_star.front() < 0.0) {
            out.tau_n = grid.t0;
        } else {
            for (int i = 1; i < grid.n; ++i) {
                const double a = out.theta_star[i - 1];
                const double b = out.theta_star[i];
                if (a == 0.0) {
                    out.tau_n = out.grid[i - 1];
                    break;
                }
                if ((a > 0.0) != (b > 0.0)) {
                    auto f = [&](double s) { return equilibrium_theta(s, eps_at(s), p); };
                    out.tau_n = num::bisect(f, out.grid[i - 1], out.grid[i], 1e-10);
                    break;
                }
            }
        }
    }
    return out;
}

// Equilibrium under perfectly correlated risks. The loading pins to the
// margin rho*(mu-r)*eta/(sigma*l), which must lie inside the regulator's
// band for supply to be well defined.
inline EquilibriumPath perfect_correlation_path(const ModelParams& p, const TimeGrid& grid) {
    const double rho = p.financial.rho;
    if (std::abs(rho) != 1.0) {
        throw std::domain_error("perfect_correlation_path: requires rho = 1 or rho = -1");
    }
    const double margin = rho_margin(p);
    if (p.regulator.theta_lo > margin) {
        throw std::domain_error(
            "perfect_correlation_path: theta_lo <= rho*(mu-r)*eta/(sigma*l) violated "
            "(theta_lo = " +
            std::to_string(p.regulator.theta_lo) + ", margin = " + std::to_string(margin) + ")");
    }
    if (margin > p.regulator.theta_hi) {
        throw std::domain_error(
            "perfect_correlation_path: rho*(mu-r)*eta/(sigma*l) <= theta_hi violated "
            "(margin = " +
            std::to_string(margin) + ", theta_hi = " + std::to_string(p.regulator.theta_hi) + ")");
    }

    const double l = p.insurance.l;
    const double eta = p.insurance.eta;
    const double sig = p.financial.sigma;
    const double excess = p.financial.mu - p.financial.r;
    const double x = (p.regulator.theta_hi - margin) / p.delta_theta();

    EquilibriumPath out;
    out.regime = Regime::PositiveMarket;
    out.grid.reserve(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double s = grid.at(i);
        const double bracket =
            eta * eta / sig * (sharpe(p) - rho * (l / eta) * p.regulator.theta_hi) +
            excess / (p.insurer.gamma * sig * sig) * l * p.delta_theta() * p.discount(s);
        out.grid.push_back(s);
        out.theta_star.push_back(margin);
        out.x_star.push_back(x);
        out.y_star.push_back(bracket / (l * p.delta_theta()));
    }
    if (margin < 0.0) out.tau_n = grid.t0;
    return out;
}

}  // namespace insmkt
