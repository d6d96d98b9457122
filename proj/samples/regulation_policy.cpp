// Welfare response to the investment friction: sweep the intensity at one
// point in time, then print the per-time optimal policy head.

#include "insmkt/insmkt.hpp"

#include <cstdio>

int main() {
    insmkt::ModelParams p;      // benchmark parameters
    p.financial.rho = 0.3;      // positively correlated risks

    std::printf("welfare at s = 0 as friction grows:\n");
    for (double eps = 0.0; eps <= p.regulator.eps_bar + 1e-12; eps += 0.05) {
        std::printf("  eps = %.2f  w* = %.8f\n", eps, insmkt::welfare_at(0.0, eps, p));
    }

    const insmkt::TimeGrid grid = insmkt::TimeGrid::uniform(p, 6);
    const insmkt::OptimalRegulation opt = insmkt::optimal_epsilon(p, grid);
    std::printf("\nper-time optimal friction (case tags in brackets):\n");
    for (std::size_t i = 0; i < opt.grid.size(); ++i) {
        std::printf("  s = %5.1f  eps* = %.4f  [%d]\n", opt.grid[i], opt.eps_star[i],
                    opt.case_tag[i]);
    }
    for (const auto& w : opt.warnings) {
        std::printf("warning: %s\n", w.c_str());
    }
    return 0;
}
