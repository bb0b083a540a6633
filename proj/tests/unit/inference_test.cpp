#include <gtest/gtest.h>

#include <cmath>

#include "rhsim/error.hpp"
#include "rhsim/inference.hpp"

using namespace rhsim;
using namespace rhsim::infer;
using adj::Kind;

namespace {

// `low` flips in bits 0-31 and `high` in bits 32-63, spread over words.
void add_flips(dram::FlipReport& r, std::uint32_t row, int low, int high) {
    for (int i = 0; i < low; ++i)
        r.add(0, row, {static_cast<std::uint16_t>(i % 1024), static_cast<std::uint8_t>(i / 1024), false});
    for (int i = 0; i < high; ++i)
        r.add(0, row, {static_cast<std::uint16_t>(i % 1024), static_cast<std::uint8_t>(32 + i / 1024), false});
}

Verdict find(const std::vector<Verdict>& v, std::uint32_t victim) {
    for (const auto& x : v)
        if (x.victim == victim) return x;
    ADD_FAILURE() << "no verdict for row " << victim;
    return {};
}

inject::Scenario scenario_for(const dram::DeviceProfile& p) {
    inject::Scenario sc;
    sc.profile = std::make_shared<dram::DeviceProfile>(p);
    return sc;
}

}  // namespace

TEST(Classify, VerdictsFollowHalfShares) {
    dram::FlipReport r;
    add_flips(r, 5, 5000, 0);      // pure low
    add_flips(r, 6, 10, 4000);     // 99.75% high
    add_flips(r, 7, 3000, 2000);   // 40% minority
    add_flips(r, 8, 300, 300);     // 0.9% density: noise
    add_flips(r, 9, 20000, 20000); // the aggressor itself
    add_flips(r, 10, 9000, 9000);  // excluded (dummy)
    auto v = classify(r, 0, 9, {}, {10});
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(find(v, 5).kind, Kind::HalfLow);
    EXPECT_EQ(find(v, 6).kind, Kind::HalfHigh);
    EXPECT_EQ(find(v, 7).kind, Kind::Whole);
    EXPECT_DOUBLE_EQ(find(v, 7).density, 5000.0 / 65536.0);
}

TEST(Classify, LopsidedSupportIsAmbiguous) {
    dram::FlipReport r;
    add_flips(r, 3, 4000, 800);  // minority share 1/6
    try {
        classify(r, 0, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::AmbiguousSupport);
    }
    Thresholds loose;
    loose.whole_minor = 0.1;
    EXPECT_EQ(classify(r, 0, 2, loose).at(0).kind, Kind::Whole);
}

TEST(BuildMap, LinearChainMarksBothEnds) {
    const std::vector<std::uint32_t> rows{0, 1, 2, 3};
    std::vector<Verdict> v;
    for (std::uint32_t r : rows) {
        if (r > 0) v.push_back({r, r - 1, Kind::Whole, 0.7});
        if (r < 3) v.push_back({r, r + 1, Kind::Whole, 0.7});
    }
    const auto m = build_map(rows, v);
    adj::Layout line(adj::Layout::make_sequence("identity", 4), adj::Layout::make_sequence("identity", 4));
    EXPECT_EQ(m, line.to_map(0, 4));
    EXPECT_TRUE(m.find(0)->edge[0] && m.find(0)->edge[1]);
    EXPECT_FALSE(m.find(1)->edge[0] || m.find(1)->edge[1]);
}

TEST(BuildMap, RowWithoutVictimsIsAnEdgeOnBothHalves) {
    auto m = build_map({7}, {});
    ASSERT_TRUE(m.contains(7));
    EXPECT_TRUE(m.find(7)->victims.empty());
    EXPECT_TRUE(m.find(7)->edge[0] && m.find(7)->edge[1]);
}

TEST(SuggestThreshold, PicksTheWidestLogGap) {
    auto t = suggest_threshold({0.77, 0.8, 0.39, 1.5e-5, 3e-5});
    ASSERT_TRUE(t);
    EXPECT_GT(*t, 3e-5);
    EXPECT_LT(*t, 0.39);
    EXPECT_NEAR(std::log10(*t), (std::log10(3e-5) + std::log10(0.39)) / 2, 1e-9);
    EXPECT_FALSE(suggest_threshold({0.5, 0.7, 0.2}));
    EXPECT_FALSE(suggest_threshold({0.5}));
}

class SyntheticInference : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SyntheticInference, RecoversGroundTruth) {
    const auto p = dram::DeviceProfile::synthetic(GetParam());
    InferOptions opt;
    opt.workers = 2;
    const auto res = infer_range(scenario_for(p), 0, 64, opt);
    const auto truth = p.topology->to_map(0, 64);
    const auto diff = verify_map(res.map, truth);
    EXPECT_TRUE(diff.empty()) << diff.to_text();
    ASSERT_TRUE(res.suggested_noise);
    const auto csv = res.density_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "aggressor,row,density");
}

INSTANTIATE_TEST_SUITE_P(Seeds, SyntheticInference, ::testing::Values(1, 5, 11));

TEST(Inference, WorkerCountDoesNotChangeTheMap) {
    const auto p = dram::DeviceProfile::synthetic(8);
    InferOptions one, many;
    one.workers = 1;
    many.workers = 3;
    const auto a = infer_range(scenario_for(p), 0, 24, one);
    const auto b = infer_range(scenario_for(p), 0, 24, many);
    EXPECT_EQ(a.map, b.map);
    EXPECT_EQ(a.densities, b.densities);
}

TEST(Inference, LowDensityDeviceNeedsALowerNoiseFloor) {
    const auto p = dram::DeviceProfile::builtin("vendor3");
    const auto truth = p.topology->to_map(0x11410, 0x11411);
    InferOptions opt;
    opt.workers = 1;
    auto coarse = infer_range(scenario_for(p), 0x11410, 0x11411, opt);
    EXPECT_FALSE(verify_map(coarse.map, truth).empty());
    opt.thresholds.noise = 0.0002;
    auto fine = infer_range(scenario_for(p), 0x11410, 0x11411, opt);
    EXPECT_TRUE(verify_map(fine.map, truth).empty()) << verify_map(fine.map, truth).to_text();
}
