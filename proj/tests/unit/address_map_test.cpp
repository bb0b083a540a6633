#include <gtest/gtest.h>

#include <random>

#include "rhsim/address_map.hpp"
#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"

using namespace rhsim;
using namespace rhsim::addr;

TEST(AddressMap, DefaultLayoutFields) {
    auto m = MappingConfig::default_for(1u << 17);
    m.validate();
    EXPECT_EQ(m.width(), 34u);
    EXPECT_EQ(m.field_width(Field::Row), 17u);
    EXPECT_EQ(m.field_width(Field::Column), 10u);
    EXPECT_EQ(m.field_width(Field::Bank), 4u);
    // Oracle: shifts straight from the documented bit positions.
    const std::uint64_t pa = (std::uint64_t{0x11410} << 17) | (std::uint64_t{0xB} << 13) | (0x155u << 3) | 5;
    auto la = phys_to_logical(m, pa);
    EXPECT_EQ(la.row, 0x11410u);
    EXPECT_EQ(la.bank.flat(), 0xBu);
    EXPECT_EQ(la.col, 0x155);
    EXPECT_EQ(la.byte, 5);
}

TEST(AddressMap, RoundTripIsBijective) {
    auto m = MappingConfig::default_for(1u << 17);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20'000; ++i) {
        const std::uint64_t pa = rng() & (m.memory_size() - 1);
        const auto la = phys_to_logical(m, pa);
        ASSERT_EQ(logical_to_phys(m, la), pa);
        ASSERT_EQ(phys_to_logical(m, logical_to_phys(m, la)), la);
    }
}

TEST(AddressMap, SplitFieldsFromConfig) {
    // Bank bits interleaved below and above the column.
    auto cfg = KvConfig::parse(
        "map.slice = byte 0:2\n"
        "map.slice = bank 3:4\n"
        "map.slice = column 5:14\n"
        "map.slice = bank 15:16\n"
        "map.slice = row 17:26\n"
        "map.va_base = 0x1000\n");
    auto m = MappingConfig::from_config(cfg, 1024);
    m.validate();
    EXPECT_EQ(m.field_width(Field::Bank), 4u);
    LogicalAddr la;
    la.bank = ddr::BankId::from_flat(0b1110);
    la.row = 0x2AB;
    la.col = 0x3FF;
    const auto pa = logical_to_phys(m, la);
    EXPECT_EQ((pa >> 3) & 3, 0b10u);
    EXPECT_EQ((pa >> 15) & 3, 0b11u);
    EXPECT_EQ(phys_to_logical(m, pa), la);
    EXPECT_EQ(phys_to_virt(m, virt_to_phys(m, 0x5000)), 0x5000u);
    EXPECT_EQ(virt_to_phys(m, 0x5000), 0x6000u);
}

TEST(AddressMap, RejectsOverlapsAndOutOfRange) {
    MappingConfig m = MappingConfig::default_for(1u << 17);
    m.slices.push_back({Field::Rank, 5, 1});
    EXPECT_THROW(m.validate(), Error);

    auto d = MappingConfig::default_for(1u << 10);
    LogicalAddr la;
    la.row = 1u << 10;
    EXPECT_THROW(logical_to_phys(d, la), Error);
    EXPECT_THROW(phys_to_logical(d, d.memory_size()), Error);
    auto based = d;
    based.va_base = 0x100;
    EXPECT_THROW(phys_to_virt(based, 0x10), Error);
}
