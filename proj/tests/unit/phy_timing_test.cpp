#include <gtest/gtest.h>

#include "mlo/phy_timing.hpp"

namespace {

mlo::PhyMacParams short_control_frames() {
    mlo::PhyMacParams p;
    p.t_rts = p.t_cts = p.t_ack = 32e-6;
    return p;
}

TEST(AirTimes, HandComputedExampleWithShortControlFrames) {
    const auto air = mlo::compute_air_times(short_control_frames());
    // 40 us + 12000 / 980.4e6 s = 52.2399 us
    EXPECT_NEAR(air.t_data * 1e6, 52.2399, 1e-3);
    EXPECT_NEAR(air.t_c * 1e6, 123.0, 1e-9);
    EXPECT_NEAR(air.t_s * 1e6, 239.2399, 1e-3);
}

TEST(AirTimes, DefaultsUseBasicRateControlFrames) {
    const auto air = mlo::compute_air_times(mlo::PhyMacParams{});
    EXPECT_NEAR(air.t_c * 1e6, 52 + 16 + 44 + 34 + 9, 1e-9);
    EXPECT_NEAR(air.t_s * 1e6, 52 + 16 + 44 + 16 + 52.2399 + 16 + 68 + 34 + 9, 1e-3);
}

TEST(AirTimes, SuccessMinusCollisionIsDataAndAckLeg) {
    for (double bits : {800.0, 12000.0, 96000.0}) {
        mlo::PhyMacParams p;
        p.packet_bits = bits;
        const auto air = mlo::compute_air_times(p);
        EXPECT_NEAR(air.t_s - air.t_c, p.sifs + air.t_data + p.sifs + p.t_ack, 1e-15);
    }
}

TEST(AirTimes, DegenerateParametersRejected) {
    mlo::PhyMacParams p;
    p.t_rts = p.t_cts = p.t_ack = p.phy_preamble = 0;
    p.sifs = p.difs = p.sigma = 0;
    p.data_rate = 1;
    p.packet_bits = 1;
    EXPECT_THROW(mlo::compute_air_times(p), mlo::InvalidParameter);
}

TEST(AirTimes, InvalidFieldsRejected) {
    auto expect_bad = [](auto mutate) {
        mlo::PhyMacParams p;
        mutate(p);
        EXPECT_THROW(mlo::compute_air_times(p), mlo::InvalidParameter);
    };
    expect_bad([](mlo::PhyMacParams& p) { p.sigma = -1e-6; });
    expect_bad([](mlo::PhyMacParams& p) { p.data_rate = 0; });
    expect_bad([](mlo::PhyMacParams& p) { p.packet_bits = 0; });
    expect_bad([](mlo::PhyMacParams& p) { p.cw_min = 0; });
    expect_bad([](mlo::PhyMacParams& p) { p.m_stages = -1; });
}

TEST(AirTimes, DoublingPacketAddsExactlyOnePayload) {
    mlo::PhyMacParams p;
    const auto a = mlo::compute_air_times(p);
    p.packet_bits *= 2;
    const auto b = mlo::compute_air_times(p);
    EXPECT_NEAR(b.t_s - a.t_s, 12000 / p.data_rate, 1e-15);
    EXPECT_EQ(b.t_c, a.t_c);
}

TEST(AirTimes, MonotoneInPacketSizeAndRate) {
    mlo::PhyMacParams p;
    double prev_ts = 0;
    const double tc = mlo::compute_air_times(p).t_c;
    for (double bits = 1000; bits <= 64000; bits *= 2) {
        p.packet_bits = bits;
        const auto air = mlo::compute_air_times(p);
        EXPECT_GT(air.t_s, prev_ts);
        EXPECT_EQ(air.t_c, tc);
        prev_ts = air.t_s;
    }
    p = {};
    double prev = 1.0;
    for (double rate = 100e6; rate <= 3200e6; rate *= 2) {
        p.data_rate = rate;
        const auto air = mlo::compute_air_times(p);
        EXPECT_LT(air.t_s, prev);
        EXPECT_EQ(air.t_c, tc);
        prev = air.t_s;
    }
}

TEST(AirTimes, PureAndRepeatable) {
    const mlo::PhyMacParams p;
    const auto a = mlo::compute_air_times(p);
    const auto b = mlo::compute_air_times(p);
    EXPECT_EQ(a.t_s, b.t_s);
    EXPECT_EQ(a.t_c, b.t_c);
    EXPECT_EQ(a.t_data, b.t_data);
}

TEST(AirTimes, LongerFrameTakesLonger) {
    const mlo::PhyMacParams p;
    const auto air = mlo::compute_air_times(p);
    EXPECT_DOUBLE_EQ(mlo::success_time(p, air, p.packet_bits), air.t_s);
    EXPECT_GT(mlo::success_time(p, air, 2 * p.packet_bits), air.t_s);
}

}  // namespace
