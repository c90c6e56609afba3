// Prints the analytic 95th-percentile delay against offered load for one to
// four interfaces sharing links with five contenders at activity 0.25.

#include <iomanip>
#include <iostream>

#include "mlo/mlo.hpp"

int main() {
    const mlo::PhyMacParams phy;
    std::cout << "load_mbps";
    for (int S = 1; S <= 4; ++S) std::cout << "  S=" << S << "_p95_ms";
    std::cout << '\n';
    for (int load = 2; load <= 40; load += 2) {
        std::cout << std::setw(9) << load;
        for (int S = 1; S <= 4; ++S) {
            const auto sc = mlo::Scenario::from_load(S, load * 1e6, phy.packet_bits, 5, 0.25);
            const auto sol = mlo::solve_fixed_point(sc, phy);
            std::cout << std::setw(13) << mlo::experiments::format_ms(sol.quantile(0.95));
        }
        std::cout << '\n';
    }
}
