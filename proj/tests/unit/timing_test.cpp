#include <gtest/gtest.h>

#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/timing.hpp"

using namespace rhsim;
using namespace rhsim::timing;

TEST(Timing, OptimalRateIsRefreshIntervalOverRowCycle) {
    TimingParams p;
    EXPECT_NEAR(optimal_act_rate(p), 7812.5 / 46.7, 1e-9);
    EXPECT_NEAR(optimal_act_rate(p), 167.3, 0.5);
}

TEST(Timing, MaxActsBetweenRefreshes) {
    TimingParams p;
    // ACTs at 350, 396.7, ... up to the next REF start at 7812.5 ns.
    long n = 0;
    for (Picos t = p.t_rfc; t < p.t_refi; t += p.t_rc) ++n;
    EXPECT_EQ(max_acts_per_refresh_window(p), n);
    EXPECT_EQ(n, 160);
}

TEST(Timing, RefreshEventsCoverTheRetentionWindow) {
    TimingParams p;
    auto ev = refresh_events(p, p.refresh_window);
    ASSERT_EQ(ev.size(), 8192u);
    EXPECT_EQ(ev.front().start, p.t_refi);
    EXPECT_EQ(ev.back().start, p.refresh_window);
    for (const auto& e : ev) EXPECT_EQ(e.end - e.start, p.t_rfc);
}

TEST(Timing, RefreshMultiplierStretchesTheInterval) {
    TimingParams p;
    EXPECT_EQ(refresh_events(p, p.refresh_window, {}, 2.0).size(), 4096u);
    RefreshSchedule s(p, 3.5);
    EXPECT_EQ(s.interval(), 27'343'750);
}

TEST(Timing, SuppressedWindowsDropRefs) {
    TimingParams p;
    std::vector<Interval> off{{p.t_refi, 3 * p.t_refi + 1}};
    auto ev = refresh_events(p, 5 * p.t_refi, off);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].start, 4 * p.t_refi);
    RefreshSchedule s(p, 1.0, off);
    EXPECT_FALSE(s.window_at(2 * p.t_refi + 10).has_value());
    EXPECT_TRUE(s.window_at(4 * p.t_refi + 10).has_value());
}

TEST(Timing, AdmitActRespectsRowCycleAndRefresh) {
    TimingParams p;
    RefreshSchedule s(p);
    BankTiming b;
    EXPECT_EQ(admit_act(b, 1000, s, p.t_rc), 1000);
    b.last_act = 1000;
    EXPECT_EQ(admit_act(b, 1000, s, p.t_rc), 1000 + p.t_rc);
    EXPECT_EQ(admit_act(b, 100'000, s, p.t_rc), 100'000);
    // Inside the REF window: pushed to its end.
    b.last_act.reset();
    EXPECT_EQ(admit_act(b, p.t_refi + 5, s, p.t_rc), p.t_refi + p.t_rfc);
    // Row cycle pushes into a REF window, then past it.
    b.last_act = p.t_refi - 10'000;
    EXPECT_EQ(admit_act(b, p.t_refi - 20'000, s, p.t_rc), p.t_refi + p.t_rfc);
}

TEST(Timing, NextStartIsTheFirstMultipleAtOrAfter) {
    RefreshSchedule s(TimingParams{});
    EXPECT_EQ(s.next_start(0), 7'812'500);
    EXPECT_EQ(s.next_start(7'812'500), 7'812'500);
    EXPECT_EQ(s.next_start(7'812'501), 15'625'000);
}

TEST(Timing, ValidateRejectsInconsistentParameters) {
    TimingParams p;
    p.t_rfc = p.t_refi;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.t_rc = 0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.t_refi = 7'000'000;
    EXPECT_THROW(p.validate(), Error);
}

TEST(Timing, FromConfigReadsOverrides) {
    auto cfg = KvConfig::parse("timing.t_rc = 50ns\ntiming.t_rfc = 260ns\n");
    auto p = TimingParams::from_config(cfg);
    EXPECT_EQ(p.t_rc, 50'000);
    EXPECT_EQ(p.t_rfc, 260'000);
    EXPECT_EQ(p.t_refi, 7'812'500);
}

TEST(Timing, SimClockIsMonotone) {
    SimClock c;
    c.advance_to(10);
    c.advance_to(5);
    EXPECT_EQ(c.now, 10);
}
