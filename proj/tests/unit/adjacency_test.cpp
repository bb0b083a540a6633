#include <gtest/gtest.h>

#include <algorithm>

#include "rhsim/adjacency.hpp"
#include "rhsim/dram_device.hpp"
#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"

using namespace rhsim;
using namespace rhsim::adj;

namespace {

std::vector<Neighbor> sorted(std::vector<Neighbor> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST(Adjacency, LinearLayoutIsTwoWholeNeighbors) {
    Layout l(Layout::make_sequence("linear", 16), Layout::make_sequence("identity", 16));
    EXPECT_EQ(sorted(l.neighbors(5)), (std::vector<Neighbor>{{4, Kind::Whole}, {6, Kind::Whole}}));
    EXPECT_EQ(l.neighbors(0), (std::vector<Neighbor>{{1, Kind::Whole}}));
    EXPECT_EQ(l.half_degree(0, 0), 1);
    EXPECT_EQ(l.half_degree(15, 1), 1);
    EXPECT_EQ(l.half_degree(7, 1), 2);
}

TEST(Adjacency, BlockReversedHighHalves) {
    auto high = Layout::make_sequence("block-reversed 8", 16);
    // Blocks come in reverse order, rows inside a block stay ascending.
    EXPECT_EQ(high, (std::vector<std::int32_t>{8, 9, 10, 11, 12, 13, 14, 15, 0, 1, 2, 3, 4, 5, 6, 7}));
    Layout l(Layout::make_sequence("identity", 16), high);
    EXPECT_EQ(sorted(l.neighbors(7)), (std::vector<Neighbor>{{6, Kind::Whole}, {8, Kind::HalfLow}}));
    EXPECT_EQ(sorted(l.neighbors(15)), (std::vector<Neighbor>{{0, Kind::HalfHigh}, {14, Kind::Whole}}));
    EXPECT_EQ(sorted(l.neighbors(8)), (std::vector<Neighbor>{{7, Kind::HalfLow}, {9, Kind::Whole}}));
    EXPECT_EQ(l.half_degree(8, 1), 1);
}

TEST(Adjacency, Vendor1SixteenRowTable) {
    const auto prof = dram::DeviceProfile::builtin("vendor1");
    const auto& t = *prof.topology;
    EXPECT_EQ(sorted(t.neighbors(0x11411)), (std::vector<Neighbor>{{0x11410, Kind::Whole}, {0x11412, Kind::Whole}}));
    EXPECT_EQ(sorted(t.neighbors(0x11410)),
              (std::vector<Neighbor>{{0x1140F, Kind::HalfLow}, {0x11411, Kind::Whole}, {0x1141F, Kind::HalfHigh}}));
    EXPECT_EQ(sorted(t.neighbors(0x1140F)),
              (std::vector<Neighbor>{{0x11400, Kind::HalfHigh}, {0x1140E, Kind::Whole}, {0x11410, Kind::HalfLow}}));
    EXPECT_EQ(sorted(t.neighbors(0x11408)),
              (std::vector<Neighbor>{{0x11407, Kind::HalfLow}, {0x11409, Kind::Whole}, {0x11417, Kind::HalfHigh}}));
    EXPECT_EQ(sorted(t.neighbors(0x11417)),
              (std::vector<Neighbor>{{0x11408, Kind::HalfHigh}, {0x11416, Kind::Whole}, {0x11418, Kind::HalfLow}}));
    EXPECT_EQ(t.to_map(0, prof.rows_per_bank).check_symmetric(), "");
}

TEST(Adjacency, Vendor1EdgeRowsHaveOneHalfNeighbor) {
    const auto prof = dram::DeviceProfile::builtin("vendor1");
    const auto& t = *prof.topology;
    // Low halves are in identity order, so the bank ends have one neighbor.
    EXPECT_EQ(t.half_degree(0, 0), 1);
    EXPECT_EQ(t.half_degree(prof.rows_per_bank - 1, 0), 1);
}

TEST(Adjacency, Vendor2SwapsScatterHalfRows) {
    const auto prof = dram::DeviceProfile::builtin("vendor2");
    // low:  .. 08 0F 0A .. 0E 09 10 11 12 ..
    // high: .. 07 0F 09 .. 0E 08 11 10 13 12 14 ..
    EXPECT_EQ(sorted(prof.topology->neighbors(0x11411)),
              (std::vector<Neighbor>{{0x11408, Kind::HalfHigh}, {0x11410, Kind::Whole}, {0x11412, Kind::HalfLow}}));
    EXPECT_EQ(sorted(prof.topology->neighbors(0x11410)),
              (std::vector<Neighbor>{{0x11409, Kind::HalfLow}, {0x11411, Kind::Whole}, {0x11413, Kind::HalfHigh}}));
}

TEST(Adjacency, EditsMoveSwapSpare) {
    Layout l(Layout::make_sequence("identity", 8), Layout::make_sequence("identity", 8));
    l.insert_spare_after(0, 3);
    EXPECT_EQ(l.half_degree(3, 0), 1);
    EXPECT_EQ(l.half_degree(4, 0), 1);
    l.swap_rows(1, 1, 2);
    EXPECT_EQ(sorted(l.neighbors(0)), (std::vector<Neighbor>{{1, Kind::HalfLow}, {2, Kind::HalfHigh}}));
    l.move_after(1, 7, 0);
    EXPECT_EQ(l.sequence(1), (std::vector<std::int32_t>{0, 7, 2, 1, 3, 4, 5, 6}));
    EXPECT_THROW(Layout({0, 1, 1}, {0, 1, 2}), Error);
}

TEST(Adjacency, TextRoundTrip) {
    const auto prof = dram::DeviceProfile::builtin("vendor1");
    const auto m = prof.topology->to_map(0x11400, 0x11420);
    const auto back = AdjacencyMap::from_config(KvConfig::parse(m.to_text()));
    EXPECT_EQ(back, m);
    EXPECT_TRUE(verify_map(back, m).empty());
}

TEST(Adjacency, VerifyMapCountsSingleDifferences) {
    AdjacencyMap a;
    a.add(1, {0, Kind::Whole});
    a.add(1, {2, Kind::HalfLow});
    a.set_edge(1, 1);
    AdjacencyMap b = a;
    EXPECT_TRUE(verify_map(a, b).empty());
    AdjacencyMap c;
    c.add(1, {0, Kind::Whole});
    c.set_edge(1, 1);
    auto d = verify_map(c, a);
    EXPECT_EQ(d.size(), 1u);
    EXPECT_EQ(d.missing.size(), 1u);
}

TEST(Adjacency, CheckSymmetricReportsOneSidedLinks) {
    AdjacencyMap a;
    a.add(1, {2, Kind::Whole});
    a.entry(2);
    EXPECT_NE(a.check_symmetric(), "");
    a.add(2, {1, Kind::Whole});
    EXPECT_EQ(a.check_symmetric(), "");
}

TEST(Adjacency, MapTopologyServesExplicitEntries) {
    AdjacencyMap m;
    m.add(3, {4, Kind::HalfHigh});
    m.set_edge(3, 0);
    MapTopology t(m, 8);
    EXPECT_EQ(t.neighbors(3), (std::vector<Neighbor>{{4, Kind::HalfHigh}}));
    EXPECT_TRUE(t.neighbors(5).empty());
    EXPECT_EQ(t.half_degree(3, 1), 1);
}

class SyntheticLayout : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SyntheticLayout, TestedRowsNeverTouchScratch) {
    SyntheticOptions opt;
    auto l = generate_synthetic_layout(GetParam(), opt);
    EXPECT_EQ(l->rows(), 128u);
    const auto m = l->to_map(0, l->rows());
    EXPECT_EQ(m.check_symmetric(), "");
    for (std::uint32_t r = 0; r < opt.tested_rows; ++r)
        for (const auto& n : l->neighbors(r)) EXPECT_LT(n.row, opt.tested_rows);
    for (std::uint32_t r = 0; r < l->rows(); ++r)
        for (int h = 0; h < 2; ++h) EXPECT_LE(l->half_degree(r, h), 2);
}

TEST_P(SyntheticLayout, IsDeterministicPerSeed) {
    auto a = generate_synthetic_layout(GetParam());
    auto b = generate_synthetic_layout(GetParam());
    EXPECT_EQ(a->sequence(0), b->sequence(0));
    EXPECT_EQ(a->sequence(1), b->sequence(1));
}

INSTANTIATE_TEST_SUITE_P(Seeds, SyntheticLayout, ::testing::Values(1, 2, 3, 17, 99, 12345));

TEST(Adjacency, SyntheticLayoutsMixKinds) {
    int half = 0, edge = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto l = generate_synthetic_layout(s);
        auto m = l->to_map(0, 64);
        for (const auto& [r, e] : m.entries()) {
            for (const auto& v : e.victims) half += v.kind != Kind::Whole;
            edge += e.edge[0] + e.edge[1];
        }
    }
    EXPECT_GT(half, 0);
    EXPECT_GT(edge, 0);
}
