#include "insmkt/model.hpp"
#include "insmkt/numerics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace insmkt;

namespace {

ModelParams benchmark(double rho = 0.0) {
    ModelParams p;
    p.financial.rho = rho;
    return p;
}

bool has_violation(const ValidationResult& res, const std::string& field,
                   const std::string& rule_fragment) {
    for (const auto& v : res.violations) {
        if (v.field == field && v.rule.find(rule_fragment) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("benchmark parameters validate cleanly", "[model]") {
    const ValidationResult res = validate(benchmark());
    CHECK(res.ok());
    CHECK_FALSE(res.perfect_correlation);
    CHECK(res.describe() == "ok");
}

TEST_CASE("drift must exceed the risk-free rate", "[model]") {
    ModelParams p = benchmark();
    p.financial.mu = p.financial.r;
    const ValidationResult res = validate(p);
    REQUIRE_FALSE(res.ok());
    CHECK(has_violation(res, "financial.mu", "mu > r"));
}

TEST_CASE("degenerate loading band is rejected", "[model]") {
    ModelParams p = benchmark();
    p.regulator.theta_lo = p.regulator.theta_hi;
    const ValidationResult res = validate(p);
    REQUIRE_FALSE(res.ok());
    CHECK(has_violation(res, "regulator.theta_lo", "delta_theta > 0"));
}

TEST_CASE("perfect correlation is legal but flagged", "[model]") {
    for (double rho : {1.0, -1.0}) {
        ModelParams p = benchmark(rho);
        const ValidationResult res = validate(p);
        CHECK(res.ok());
        CHECK(res.perfect_correlation);
    }
    ModelParams p = benchmark(1.5);
    const ValidationResult res = validate(p);
    REQUIRE_FALSE(res.ok());
    CHECK(has_violation(res, "financial.rho", "|rho| <= 1"));
    CHECK_FALSE(res.perfect_correlation);
}

TEST_CASE("non-finite fields are reported by name", "[model]") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();

    ModelParams p = benchmark();
    p.insurance.eta = nan;
    CHECK(has_violation(validate(p), "insurance.eta", "finite"));

    p = benchmark();
    p.insurer.m0 = inf;
    CHECK(has_violation(validate(p), "insurer.m0", "finite"));

    p = benchmark();
    p.regulator.eps_bar = -inf;
    CHECK(has_violation(validate(p), "regulator.eps_bar", "finite"));
}

TEST_CASE("remaining bound violations are reported by name", "[model]") {
    ModelParams p = benchmark();
    p.insurance.l = 0.0;
    CHECK(has_violation(validate(p), "insurance.l", "l > 0"));

    p = benchmark();
    p.financial.sigma = -0.2;
    CHECK(has_violation(validate(p), "financial.sigma", "sigma > 0"));

    p = benchmark();
    p.insurer.gamma = 0.0;
    CHECK(has_violation(validate(p), "insurer.gamma", "gamma > 0"));

    p = benchmark();
    p.insurer.T = p.insurer.t0;
    CHECK(has_violation(validate(p), "insurer.T", "T > t0"));

    p = benchmark();
    p.regulator.theta_hi = 0.0;
    CHECK(has_violation(validate(p), "regulator.theta_hi", "theta_hi > 0"));

    p = benchmark();
    p.regulator.theta_lo = -1.5;
    CHECK(has_violation(validate(p), "regulator.theta_lo", "theta_lo >= -1"));

    p = benchmark();
    p.regulator.eps_bar = -0.1;
    CHECK(has_violation(validate(p), "regulator.eps_bar", "eps_bar >= 0"));
}

TEST_CASE("sharpe ratio", "[model]") {
    CHECK(sharpe(benchmark()) == Catch::Approx(0.4).margin(1e-15));

    ModelParams p = benchmark();
    p.financial.mu = p.financial.r + p.financial.sigma;
    CHECK(sharpe(p) == Catch::Approx(1.0).margin(1e-15));

    p = benchmark();
    p.financial.mu = 0.2;
    CHECK(sharpe(p) == Catch::Approx(0.8).margin(1e-15));
}

TEST_CASE("margin ratio phi", "[model]") {
    const ModelParams p = benchmark();
    CHECK(phi(0.0, p) == 0.0);
    // theta = 0.2: 0.2*0.5*0.2 / (0.08*0.1) = 0.02/0.008
    CHECK(phi(0.2, p) == Catch::Approx(2.5).margin(1e-14));

    // the loading that makes phi equal the correlation
    for (double rho : {-0.7, -0.2, 0.3, 0.9}) {
        const double theta = rho * (p.financial.mu - p.financial.r) * p.insurance.eta /
                             (p.insurance.l * p.financial.sigma);
        CHECK(phi(theta, p) == Catch::Approx(rho).margin(1e-14));
    }
}

TEST_CASE("phi is linear in theta", "[model]") {
    const ModelParams p = benchmark();
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng);
        const double lhs = phi(a * b + c, p);
        const double rhs = a * phi(b, p) + phi(c, p);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
        CHECK(num::sign(phi(b, p)) == num::sign(b));
    }
}

TEST_CASE("demand endpoints and midpoint", "[model]") {
    const ModelParams p = benchmark();
    CHECK(demand(p.regulator.theta_hi, p) == 0.0);
    CHECK(demand(p.regulator.theta_lo, p) == 1.0);
    CHECK(demand(0.0, p) == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("demand rejects loadings outside the band, naming the bound", "[model]") {
    const ModelParams p = benchmark();
    CHECK_THROWS_WITH(demand(0.25, p), Catch::Matchers::ContainsSubstring("theta_hi"));
    CHECK_THROWS_WITH(demand(-0.21, p), Catch::Matchers::ContainsSubstring("theta_lo"));
    CHECK_THROWS_AS(demand(0.25, p), std::domain_error);
}

TEST_CASE("demand is strictly decreasing on the band", "[model]") {
    const ModelParams p = benchmark();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(p.regulator.theta_lo, p.regulator.theta_hi);
    for (int i = 0; i < 300; ++i) {
        double a = u(rng), b = u(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        CHECK(demand(a, p) > demand(b, p));
    }
}

TEST_CASE("validation verdict matches a direct predicate over random draws", "[model]") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        ModelParams p;
        p.insurance.l = u(rng) + 0.5;
        p.insurance.eta = u(rng) * 0.3;
        p.financial.r = u(rng) * 0.1;
        p.financial.mu = p.financial.r + u(rng) * 0.2;
        p.financial.sigma = u(rng) * 0.5;
        p.financial.rho = u(rng) * 1.3;
        p.insurer.gamma = u(rng) * 3.0;
        p.insurer.T = p.insurer.t0 + u(rng) * 60.0;
        p.regulator.theta_hi = u(rng) * 0.6;
        p.regulator.theta_lo = u(rng) * 1.4 - 0.4;
        p.regulator.eps_bar = u(rng) * 0.4;

        const bool expected = p.insurance.l > 0 && p.insurance.eta > 0 &&
                              p.financial.sigma > 0 && p.financial.mu > p.financial.r &&
                              std::abs(p.financial.rho) <= 1 && p.insurer.gamma > 0 &&
                              p.insurer.T > p.insurer.t0 && p.regulator.theta_hi > 0 &&
                              p.regulator.theta_lo >= -1 &&
                              p.regulator.theta_lo < p.regulator.theta_hi &&
                              p.regulator.eps_bar >= 0;
        CHECK(validate(p).ok() == expected);
    }
}
