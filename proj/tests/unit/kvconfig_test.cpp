#include <gtest/gtest.h>

#include "rhsim/error.hpp"
#include "rhsim/hashing.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/units.hpp"

using namespace rhsim;

TEST(Units, ParseDuration) {
    EXPECT_EQ(parse_duration("46.7ns"), 46'700);
    EXPECT_EQ(parse_duration("15s"), 15 * kPsPerSec);
    EXPECT_EQ(parse_duration("128ms"), 128 * kPsPerMs);
    EXPECT_EQ(parse_duration("2us"), 2 * kPsPerUs);
    EXPECT_EQ(parse_duration("7812500"), 7'812'500);
    EXPECT_EQ(parse_duration("7812500ps"), 7'812'500);
    EXPECT_EQ(parse_duration("3trefi", 7'812'500), 23'437'500);
    EXPECT_THROW(parse_duration("3trefi"), Error);
    EXPECT_THROW(parse_duration("fast"), Error);
    EXPECT_THROW(parse_duration("12parsecs"), Error);
}

TEST(Units, ParseUintAndHex) {
    EXPECT_EQ(parse_uint("0x11410"), 0x11410u);
    EXPECT_EQ(parse_uint("42"), 42u);
    EXPECT_THROW(parse_uint("-1"), Error);
    EXPECT_THROW(parse_uint("0xZZ"), Error);
    EXPECT_EQ(to_hex(0x11410), "0x11410");
    EXPECT_EQ(to_hex(7, 4), "0x0007");
}

TEST(KvConfig, SectionsRepeatsAndComments) {
    auto cfg = KvConfig::parse("a = 1\n# comment\nb = x y  # trailing\nb = z\n[s1]\na = 2\n");
    EXPECT_EQ(cfg.get("a"), "1");
    EXPECT_EQ(cfg.get("a", "s1"), "2");
    EXPECT_EQ(cfg.get("b"), "z");
    ASSERT_EQ(cfg.all("b").size(), 2u);
    EXPECT_EQ(cfg.all("b")[0]->value, "x y");
    EXPECT_EQ(cfg.sections(), std::vector<std::string>{"s1"});
    EXPECT_FALSE(cfg.get("missing"));
    EXPECT_EQ(cfg.get_or("missing", "d"), "d");
}

TEST(KvConfig, SetReplacesEveryOccurrence) {
    auto cfg = KvConfig::parse("k = 1\nk = 2\n");
    cfg.set("k", "3");
    ASSERT_EQ(cfg.all("k").size(), 1u);
    EXPECT_EQ(cfg.get_uint("k", 0), 3u);
    cfg.set("new", "0.5");
    EXPECT_DOUBLE_EQ(cfg.get_double("new", 0), 0.5);
}

TEST(KvConfig, MalformedLinesNameTheLine) {
    try {
        KvConfig::parse("a = 1\nno equals sign here\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::Parse);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Hashing, UnitDrawsAreUniformAndKeyed) {
    double sum = 0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        double u = to_unit(splitmix64(hash_key(9, {1, 2}) + i));
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NE(hash_key(1, {2, 3}), hash_key(1, {3, 2}));
    EXPECT_EQ(hash_key(1, {2, 3}), hash_key(1, {2, 3}));
}
