#include "insmkt/strategy.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace insmkt;

namespace {

ModelParams benchmark(double rho = 0.0) {
    ModelParams p;
    p.financial.rho = rho;
    return p;
}

}  // namespace

TEST_CASE("uncorrelated active controls at the horizon", "[strategy]") {
    const ModelParams p = benchmark(0.0);
    const StrategyPoint sp = optimal_point(0.2, p.insurer.T, p);
    REQUIRE(sp.branch == Branch::UnderwritingActive);
    // x = theta*l/(gamma*eta^2), y = (mu-r)/(gamma*sigma^2), both undiscounted at s = T
    CHECK(sp.x_star == Catch::Approx(5.0).epsilon(1e-12));
    CHECK(sp.y_star == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(sp.exponent_rate == Catch::Approx(0.58).epsilon(1e-12));
}

TEST_CASE("negatively correlated controls at zero loading", "[strategy]") {
    const ModelParams p = benchmark(-0.7);
    const StrategyPoint sp = optimal_point(0.0, p.insurer.T, p);
    REQUIRE(sp.branch == Branch::UnderwritingActive);
    // hedging demand keeps underwriting active at theta = 0:
    // x = 0.7*0.08*0.1/(2*0.51*0.01*0.2), y = 0.08*0.1/(2*0.51*0.1*0.04)
    CHECK(sp.x_star == Catch::Approx(0.0056 / 0.00204).epsilon(1e-12));
    CHECK(sp.y_star == Catch::Approx(0.008 / 0.00408).epsilon(1e-12));
}

TEST_CASE("zero branch when the margin ratio is dominated", "[strategy]") {
    const ModelParams p = benchmark(0.9);
    const double s = 20.0;
    const StrategyPoint sp = optimal_point(0.05, s, p);  // phi = 0.625 < 0.9
    REQUIRE(sp.branch == Branch::UnderwritingZero);
    CHECK(sp.x_star == 0.0);
    CHECK(sp.y_star == Catch::Approx((0.08 / (2.0 * 0.04)) * p.discount(s)).epsilon(1e-13));
    CHECK(sp.exponent_rate == Catch::Approx(0.08 * 0.08 / (2.0 * 0.04)).epsilon(1e-13));
}

TEST_CASE("tie between margin ratio and correlation goes to the zero branch", "[strategy]") {
    const ModelParams p = benchmark(0.5);
    const double theta_c = underwriting_threshold_theta(0.0, 10.0, p);
    CHECK(phi(theta_c, p) == Catch::Approx(0.5).margin(1e-14));
    CHECK(optimal_point(theta_c, 10.0, p).branch == Branch::UnderwritingZero);
}

TEST_CASE("controls scale with the discount factor", "[strategy]") {
    const ModelParams p = benchmark(-0.4);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> us(0.0, 50.0);
    std::uniform_real_distribution<double> ut(-0.2, 0.2);
    for (int i = 0; i < 50; ++i) {
        const double s = us(rng);
        const double theta = ut(rng);
        const StrategyPoint at_T = optimal_point(theta, p.insurer.T, p);
        const StrategyPoint at_s = optimal_point(theta, s, p);
        REQUIRE(at_s.branch == at_T.branch);
        CHECK(at_s.x_star == Catch::Approx(at_T.x_star * p.discount(s)).margin(1e-14));
        CHECK(at_s.y_star == Catch::Approx(at_T.y_star * p.discount(s)).epsilon(1e-12));
        // the exponent rate is undiscounted
        CHECK(at_s.exponent_rate == Catch::Approx(at_T.exponent_rate).epsilon(1e-12));
    }
}

TEST_CASE("friction multiplier", "[strategy]") {
    const ModelParams p = benchmark(0.0);
    CHECK(kappa(0.2, p.insurer.T, p) == Catch::Approx(3.5).epsilon(1e-14));
    CHECK(kappa(0.0, 17.0, p) == 1.0);
    // decays toward 1 away from the horizon
    CHECK(kappa(0.2, 0.0, p) == Catch::Approx(1.0 + 2.5 * p.discount(0.0)).epsilon(1e-13));
}

TEST_CASE("frictional zero-branch investment", "[strategy]") {
    const ModelParams p = benchmark(0.5);
    const StrategyPoint sp = optimal_point_frictional(0.0, p.insurer.T, 0.2, p);
    REQUIRE(sp.branch == Branch::UnderwritingZero);
    CHECK(sp.y_star == Catch::Approx(0.08 / 0.28).epsilon(1e-13));
    CHECK(sp.exponent_rate == Catch::Approx(0.08 * 0.08 / (2.0 * 3.5 * 0.04)).epsilon(1e-13));
}

TEST_CASE("frictional active controls at the horizon", "[strategy]") {
    const ModelParams p = benchmark(0.5);
    const StrategyPoint sp = optimal_point_frictional(0.2, p.insurer.T, 0.2, p);
    REQUIRE(sp.branch == Branch::UnderwritingActive);
    // kappa = 3.5, kappa - rho^2 = 3.25
    CHECK(sp.x_star == Catch::Approx((3.5 * 0.02 - 0.5 * 0.008) / (2.0 * 3.25 * 0.01 * 0.2))
                           .epsilon(1e-12));
    CHECK(sp.y_star ==
          Catch::Approx((0.008 - 0.5 * 0.02) / (2.0 * 3.25 * 0.1 * 0.04)).epsilon(1e-12));
    CHECK(sp.exponent_rate ==
          Catch::Approx((3.5 * 0.0004 - 0.00016 + 0.000064) / (2.0 * 3.25 * 0.01 * 0.04))
              .epsilon(1e-12));
}

TEST_CASE("friction leaves uncorrelated underwriting untouched", "[strategy]") {
    const ModelParams p = benchmark(0.0);
    for (double eps : {0.05, 0.1, 0.2}) {
        const StrategyPoint with = optimal_point_frictional(0.2, 30.0, eps, p);
        const StrategyPoint without = optimal_point(0.2, 30.0, p);
        // x = theta*l*disc/(gamma*eta^2) has no kappa left when rho = 0
        CHECK(with.x_star == Catch::Approx(without.x_star).epsilon(1e-12));
        CHECK(std::abs(with.y_star) < std::abs(without.y_star));
    }
}

TEST_CASE("zero friction reproduces the frictionless controls bit for bit", "[strategy]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ur(-0.95, 0.95);
    std::uniform_real_distribution<double> ut(-0.2, 0.2);
    std::uniform_real_distribution<double> us(0.0, 50.0);
    for (int i = 0; i < 300; ++i) {
        const ModelParams p = benchmark(ur(rng));
        const double theta = ut(rng);
        const double s = us(rng);
        const StrategyPoint a = optimal_point(theta, s, p);
        const StrategyPoint b = optimal_point_frictional(theta, s, 0.0, p);
        CHECK(a.x_star == b.x_star);
        CHECK(a.y_star == b.y_star);
        CHECK(a.exponent_rate == b.exponent_rate);
        CHECK(a.branch == b.branch);
    }
}

TEST_CASE("controls are continuous across the branch switch", "[strategy]") {
    const ModelParams p = benchmark(0.6);
    for (double eps : {0.0, 0.15}) {
        const double s = 25.0;
        const double theta_c = underwriting_threshold_theta(eps, s, p);
        const StrategyPoint below = optimal_point_frictional(theta_c - 1e-9, s, eps, p);
        const StrategyPoint above = optimal_point_frictional(theta_c + 1e-9, s, eps, p);
        REQUIRE(below.branch == Branch::UnderwritingZero);
        REQUIRE(above.branch == Branch::UnderwritingActive);
        CHECK(above.x_star == Catch::Approx(0.0).margin(1e-7));
        CHECK(above.y_star == Catch::Approx(below.y_star).margin(1e-7));
        CHECK(above.exponent_rate == Catch::Approx(below.exponent_rate).margin(1e-7));
    }
}

TEST_CASE("underwriting exposure never goes negative", "[strategy]") {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> ur(-0.99, 0.99);
    std::uniform_real_distribution<double> ut(-1.0, 0.6);
    std::uniform_real_distribution<double> us(0.0, 50.0);
    std::uniform_real_distribution<double> ue(0.0, 0.2);
    for (int i = 0; i < 500; ++i) {
        const ModelParams p = benchmark(ur(rng));
        const StrategyPoint sp = optimal_point_frictional(ut(rng), us(rng), ue(rng), p);
        CHECK(sp.x_star >= 0.0);
    }
}

TEST_CASE("perfect correlation is rejected with a pointer to the special branch", "[strategy]") {
    for (double rho : {1.0, -1.0}) {
        const ModelParams p = benchmark(rho);
        CHECK_THROWS_WITH(optimal_point(0.1, 10.0, p),
                          Catch::Matchers::ContainsSubstring("perfect-correlation"));
        CHECK_THROWS_AS(optimal_point_frictional(0.1, 10.0, 0.1, p), std::domain_error);
    }
}

TEST_CASE("pointwise objective at zero controls and at the optimum", "[strategy]") {
    const ModelParams p = benchmark(0.0);
    const ValuePartials v = scaled_value_partials(p.insurer.T, 0.0, p);
    CHECK(v.v_m == 1.0);
    CHECK(v.v_mm == -2.0);
    CHECK(hjb_integrand(0.0, 0.0, 0.2, 0.0, v, p, 0.0) == 0.0);
    // wealth enters only through the financing term v_m * m * r
    CHECK(hjb_integrand(0.0, 0.0, 0.2, 1.5, v, p, 0.0) ==
          Catch::Approx(1.5 * 0.04).margin(1e-15));
    // at the optimum the objective equals rate * discount / gamma
    const StrategyPoint sp = optimal_point(0.2, p.insurer.T, p);
    CHECK(hjb_integrand(sp.x_star, sp.y_star, 0.2, 0.0, v, p, 0.0) ==
          Catch::Approx(0.29).epsilon(1e-12));
}

TEST_CASE("closed-form controls beat nearby probes", "[strategy]") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> ur(-0.9, 0.9);
    std::uniform_real_distribution<double> ut(-0.2, 0.2);
    std::uniform_real_distribution<double> us(0.0, 50.0);
    std::uniform_real_distribution<double> ue(0.0, 0.2);
    const double delta = 1e-3;
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = benchmark(ur(rng));
        const double theta = ut(rng);
        const double s = us(rng);
        const double eps = ue(rng);
        const ValuePartials v = scaled_value_partials(s, 0.0, p);
        const StrategyPoint sp = optimal_point_frictional(theta, s, eps, p);
        const double best = hjb_integrand(sp.x_star, sp.y_star, theta, 0.0, v, p, eps);
        const double probes[4][2] = {{sp.x_star + delta, sp.y_star},
                                     {std::max(0.0, sp.x_star - delta), sp.y_star},
                                     {sp.x_star, sp.y_star + delta},
                                     {sp.x_star, sp.y_star - delta}};
        for (const auto& pr : probes) {
            CHECK(best >= hjb_integrand(pr[0], pr[1], theta, 0.0, v, p, eps) - 1e-15);
        }
    }
}

TEST_CASE("value function boundary and benchmark value", "[strategy]") {
    const ModelParams p = benchmark(0.0);
    const auto flat = [](double) { return 0.2; };

    // at the horizon the value equals the utility of current wealth exactly
    for (double m : {-1.0, 0.0, 0.7}) {
        CHECK(value_function(p.insurer.T, m, flat, std::nullopt, p) ==
              -std::exp(-p.insurer.gamma * m) / p.insurer.gamma);
    }

    // constant exponent rate 0.58 over 50 years
    CHECK(value_function(0.0, 0.0, flat, std::nullopt, p) ==
          Catch::Approx(-0.5 * std::exp(-29.0)).epsilon(1e-10));

    // increasing in wealth, always negative
    const double lo = value_function(10.0, -0.5, flat, std::nullopt, p);
    const double hi = value_function(10.0, 0.5, flat, std::nullopt, p);
    CHECK(lo < hi);
    CHECK(hi < 0.0);
}

TEST_CASE("value function treats a zero schedule and no schedule identically", "[strategy]") {
    const ModelParams p = benchmark(-0.3);
    const auto flat = [](double) { return 0.1; };
    const auto zero_schedule = FrictionSchedule::constant(0.0);
    for (double t : {0.0, 12.5, 40.0}) {
        CHECK(value_function(t, 0.2, flat, zero_schedule, p) ==
              value_function(t, 0.2, flat, std::nullopt, p));
    }
}

TEST_CASE("friction lowers the value of the same market", "[strategy]") {
    const ModelParams p = benchmark(0.3);
    const auto flat = [](double) { return 0.15; };
    const double free = value_function(0.0, 0.0, flat, std::nullopt, p);
    const double taxed = value_function(0.0, 0.0, flat, FrictionSchedule::constant(0.2), p);
    CHECK(taxed < free);
}
