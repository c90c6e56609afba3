// Two-link walk-through of deferred allocation: five packets, hand-placed
// neighbour activity and fixed backoff draws, printed as an event trace.

#include <iostream>

#include "mlo/mlo.hpp"

int main() {
    mlo::PhyMacParams phy;
    const double slot = phy.sigma;

    mlo::sim::SimConfig cfg;
    cfg.duration = 200 * slot;
    cfg.warmup = 0;
    cfg.record_trace = true;
    cfg.check_invariants = true;
    cfg.scripted_busy = {{0, 0.0, 10 * slot}, {1, 5 * slot, 30 * slot}};
    cfg.scripted_backoffs = {9, 5, 2, 3, 4, 7, 3};

    mlo::traffic::ScriptedSource arrivals({{2 * slot, phy.packet_bits},
                                           {4 * slot, phy.packet_bits},
                                           {20 * slot, phy.packet_bits},
                                           {90 * slot, phy.packet_bits},
                                           {92 * slot, phy.packet_bits}});
    const mlo::Scenario sc{2, 0.0, 0, 0.0};
    const auto report = mlo::sim::run(sc, phy, arrivals, cfg);
    for (const auto& line : report.trace) std::cout << line << '\n';
    std::cout << "delivered " << report.departures << " packets\n";
}
