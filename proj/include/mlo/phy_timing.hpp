#pragma once

#include <cmath>

#include "mlo/errors.hpp"

namespace mlo {

/// MAC/PHY timing and contention constants. Durations in seconds.
///
/// Defaults: 5 GHz OFDM slot/SIFS/DIFS; RTS, CTS and a compressed BlockAck
/// sent at the 6 Mb/s non-HT basic rate; the data payload at 980.4 Mb/s
/// (256-QAM 3/4, 2 spatial streams, 80 MHz, 3.2 us GI).
struct PhyMacParams {
    double sigma = 9e-6;
    double sifs = 16e-6;
    double difs = 34e-6;
    double t_rts = 52e-6;
    double t_cts = 44e-6;
    double t_ack = 68e-6;
    double phy_preamble = 40e-6;
    double data_rate = 980.4e6;  ///< bits/s
    double packet_bits = 12000;  ///< L
    int cw_min = 15;
    int m_stages = 6;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw InvalidParameter(std::string(name) + " must be positive and finite");
        };
        positive(sigma, "sigma");
        positive(sifs, "sifs");
        positive(difs, "difs");
        positive(t_rts, "t_rts");
        positive(t_cts, "t_cts");
        positive(t_ack, "t_ack");
        positive(phy_preamble, "phy_preamble");
        positive(data_rate, "data_rate");
        positive(packet_bits, "packet_bits");
        if (cw_min < 1) throw InvalidParameter("cw_min must be >= 1");
        if (m_stages < 0) throw InvalidParameter("m_stages must be >= 0");
        if (m_stages > 30) throw InvalidParameter("m_stages must be <= 30");
    }

    bool operator==(const PhyMacParams&) const = default;
};

struct AirTimes {
    double t_data = 0;  ///< preamble + payload
    double t_s = 0;     ///< successful RTS/CTS/DATA/ACK exchange
    double t_c = 0;     ///< RTS collision
};

/// T_s = RTS + SIFS + CTS + SIFS + T_data + SIFS + ACK + DIFS + sigma,
/// T_c = RTS + SIFS + CTS + DIFS + sigma.
inline AirTimes compute_air_times(const PhyMacParams& p) {
    p.validate();
    AirTimes air;
    air.t_data = p.phy_preamble + p.packet_bits / p.data_rate;
    air.t_c = p.t_rts + p.sifs + p.t_cts + p.difs + p.sigma;
    air.t_s = p.t_rts + p.sifs + p.t_cts + p.sifs + air.t_data + p.sifs + p.t_ack + p.difs + p.sigma;
    if (!(air.t_c > 0.0) || !(air.t_s > air.t_c))
        throw InvalidParameter("air times must satisfy t_s > t_c > 0");
    return air;
}

/// Successful exchange duration for a frame of `bits` instead of L.
inline double success_time(const PhyMacParams& p, const AirTimes& air, double bits) {
    return air.t_s + (bits - p.packet_bits) / p.data_rate;
}

}  // namespace mlo
