// Minimal tour of the library: classify a market, walk the equilibrium path,
// and print the headline quantities at a few points in time.

#include "insmkt/insmkt.hpp"

#include <cstdio>

int main() {
    insmkt::ModelParams p;       // benchmark parameters
    p.financial.rho = -0.7;      // losses hedge the asset book

    const insmkt::RegimeVerdict verdict = insmkt::classify(p);
    std::printf("regime: %s\n", insmkt::to_string(verdict.regime));

    const insmkt::TimeGrid grid = insmkt::TimeGrid::uniform(p, 11);
    const insmkt::EquilibriumPath path = insmkt::equilibrium_path(p, std::nullopt, grid);
    const insmkt::WelfarePath welfare = insmkt::welfare_path(p, std::nullopt, grid);

    std::printf("%8s %12s %12s %12s %12s\n", "s", "theta*", "x*", "y*", "w*");
    for (std::size_t i = 0; i < path.grid.size(); i += 2) {
        std::printf("%8.1f %12.6f %12.6f %12.6f %12.6f\n", path.grid[i], path.theta_star[i],
                    path.x_star[i], path.y_star[i], welfare.w_star[i]);
    }
    if (path.tau_n) {
        std::printf("loading turns negative at s = %.4f\n", *path.tau_n);
    }
    return 0;
}
