#pragma once

#include <cmath>

#include "mlo/backoff.hpp"
#include "mlo/errors.hpp"
#include "mlo/phy_timing.hpp"

namespace mlo {

/// What the AP observes in one of its backoff slots on a link shared with N
/// contenders that each transmit with probability tau'.
struct SlotProbabilities {
    double p_empty = 1;  ///< (1 - tau')^N
    double p_succ = 0;   ///< N tau' (1 - tau')^{N-1}
    double p_coll = 0;   ///< 1 - p_e - p_s
};

inline SlotProbabilities slot_probabilities(double tau_cont, int contenders) {
    if (!(tau_cont >= 0.0 && tau_cont <= 1.0)) throw InvalidParameter("tau' must lie in [0,1]");
    if (contenders < 0) throw InvalidParameter("contender count must be >= 0");
    SlotProbabilities s;
    if (contenders == 0) return s;
    s.p_empty = std::pow(1.0 - tau_cont, contenders);
    s.p_succ = contenders * tau_cont * std::pow(1.0 - tau_cont, contenders - 1);
    s.p_coll = std::fmax(0.0, 1.0 - s.p_empty - s.p_succ);
    return s;
}

/// rho = 1 - sigma / (p_e sigma + p_s Ts + p_c Tc)
inline double channel_occupancy(const SlotProbabilities& s, const AirTimes& air, double sigma) {
    const double mean_slot = s.p_empty * sigma + s.p_succ * air.t_s + s.p_coll * air.t_c;
    return 1.0 - sigma / mean_slot;
}

/// p = 1 - (1 - tau')^N, the chance that a contender picks the AP's slot.
inline double ap_collision_probability(double tau_cont, int contenders) {
    if (contenders <= 0) return 0.0;
    return 1.0 - std::pow(1.0 - tau_cont, contenders);
}

struct ContenderUpdate {
    double tau_cont = 0;        ///< tau'
    double p_cont = 0;          ///< p'
    double e_backoff_cont = 0;  ///< E[B'] in slots
};

/// One pass of the contender map:
///   p'    = 1 - (1 - tau'_prev)^{N-1} (1 - tau_AP)
///   E[B'] = CW(p') / 2      (single-packet contender, s = 1)
///   tau'  = alpha / (E[B'] + 1)
inline ContenderUpdate contender_update(double tau_ap, double tau_cont_prev, int contenders,
                                        double alpha, const PhyMacParams& params) {
    ContenderUpdate u;
    const int others = contenders > 0 ? contenders - 1 : 0;
    u.p_cont = 1.0 - std::pow(1.0 - tau_cont_prev, others) * (1.0 - tau_ap);
    u.p_cont = std::fmin(u.p_cont, 1.0 - 1e-12);
    u.e_backoff_cont = mean_contention_window(u.p_cont, params.cw_min, params.m_stages) / 2.0;
    u.tau_cont = alpha / (u.e_backoff_cont + 1.0);
    return u;
}

/// OBSS quantities seen by the AP on every link.
struct ObssState {
    double p_empty = 1;
    double p_succ = 0;
    double p_coll_slot = 0;
    double rho = 0;
    double p = 0;
    double tau_cont = 0;
    double p_cont = 0;
    double e_backoff_cont = 0;
};

/// Builds the full OBSS state from a contender transmission probability.
inline ObssState obss_state(double tau_cont, const ContenderUpdate& update, int contenders,
                            const AirTimes& air, double sigma) {
    const SlotProbabilities s = slot_probabilities(tau_cont, contenders);
    ObssState o;
    o.p_empty = s.p_empty;
    o.p_succ = s.p_succ;
    o.p_coll_slot = s.p_coll;
    o.rho = channel_occupancy(s, air, sigma);
    o.p = ap_collision_probability(tau_cont, contenders);
    o.tau_cont = tau_cont;
    o.p_cont = update.p_cont;
    o.e_backoff_cont = update.e_backoff_cont;
    return o;
}

}  // namespace mlo
