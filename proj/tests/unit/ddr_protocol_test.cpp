#include <gtest/gtest.h>

#include <map>
#include <optional>
#include <random>

#include "rhsim/ddr_protocol.hpp"
#include "rhsim/error.hpp"

using namespace rhsim;
using namespace rhsim::ddr;

namespace {

BankId random_bank(std::mt19937_64& rng) { return BankId::from_flat(rng() % kBanks); }

std::vector<Command> random_commands(std::mt19937_64& rng, int n) {
    std::vector<Command> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(Command::act(random_bank(rng), rng() & kAddrMask));
        out.push_back(Command::rd(random_bank(rng), rng() % kColumns, rng() & 1));
        out.push_back(Command::wr(random_bank(rng), rng() % kColumns, rng() & 1));
        out.push_back(Command::pre(random_bank(rng)));
        out.push_back(Command::mrs(rng() % 8, rng() & kAddrMask & ~kCommandLines));
    }
    out.push_back(Command::ref());
    out.push_back(Command::prea());
    out.push_back(Command::des());
    return out;
}

}  // namespace

TEST(DdrProtocol, RoundTripRandomPayloads) {
    std::mt19937_64 rng(42);
    for (const auto& c : random_commands(rng, 10'000)) {
        const auto w = encode(c);
        EXPECT_EQ(check_parity(w), ParityResult::Pass);
        ASSERT_EQ(decode(w), c) << to_string(c);
    }
}

TEST(DdrProtocol, A14TransformTable) {
    const BankId b = BankId::from_flat(5);
    auto held = [](const Command& c) { return decode(apply_a14_fault(encode(c), true)); };

    auto ref = held(Command::ref());
    EXPECT_EQ(ref.kind, CommandKind::Mrs);

    auto rd = held(Command::rd(b, 0x155));
    EXPECT_EQ(rd, Command::wr(b, 0x155));

    EXPECT_EQ(held(Command::act(b, 0x11410)), Command::act(b, 0x11410));
    EXPECT_EQ(held(Command::act(b, 0x15410)), Command::act(b, 0x11410));
    EXPECT_EQ(held(Command::wr(b, 7, true)), Command::wr(b, 7, true));
    EXPECT_EQ(held(Command::pre(b)), Command::pre(b));
    EXPECT_EQ(held(Command::prea()), Command::prea());
    EXPECT_EQ(held(Command::mrs(3, 0x123)), Command::mrs(3, 0x123));
}

TEST(DdrProtocol, A14FaultIsIdempotentAndBreaksParityOnlyWhenItChangesTheWord) {
    std::mt19937_64 rng(7);
    for (const auto& c : random_commands(rng, 500)) {
        const auto w = encode(c);
        const auto once = apply_a14_fault(w, true);
        EXPECT_EQ(apply_a14_fault(once, true), once);
        EXPECT_EQ(apply_a14_fault(w, false), w);
        EXPECT_EQ(check_parity(once) == ParityResult::Fail, once != w);
    }
}

TEST(DdrProtocol, TruthTableWalk) {
    // R (row) and V (valid) lines are driven low, X lines low too.
    const std::map<std::string, std::optional<CommandKind>> expect{
        {"DES", CommandKind::Des}, {"MRS", CommandKind::Mrs}, {"REF", CommandKind::Ref},  {"SRE", CommandKind::Ref},
        {"PRE", CommandKind::Pre}, {"PREA", CommandKind::Prea}, {"RFU", std::nullopt},    {"ACT", CommandKind::Act},
        {"WR", CommandKind::Wr},   {"RD", CommandKind::Rd},     {"ZQC/NOP", CommandKind::Des}};
    ASSERT_EQ(truth_table().size(), expect.size());
    for (const auto& row : truth_table()) {
        SignalWord w;
        w.cs_n = row.cs_n == 'H';
        w.act_n = row.act_n == 'H';
        if (row.ras == 'H') w.addr |= kA16;
        if (row.cas == 'H') w.addr |= kA15;
        if (row.we == 'H') w.addr |= kA14;
        if (row.a10 == 'H') w.addr |= kA10;
        w.parity = compute_parity(w);
        const auto& want = expect.at(row.name);
        if (!want) {
            EXPECT_THROW(decode(w), Error) << row.name;
            continue;
        }
        EXPECT_EQ(decode(w).kind, *want) << row.name;
    }
}

TEST(DdrProtocol, ParityDetectsAnySingleLineFlip) {
    const auto w = encode(Command::act(BankId::from_flat(9), 0x2A5A5));
    for (unsigned bit = 0; bit < kAddrBits; ++bit) {
        auto f = w;
        f.addr ^= 1u << bit;
        EXPECT_EQ(check_parity(f), ParityResult::Fail) << bit;
    }
    auto f = w;
    f.bg ^= 1;
    EXPECT_EQ(check_parity(f), ParityResult::Fail);
}

TEST(DdrProtocol, EncodeRejectsOutOfRangePayloads) {
    EXPECT_THROW(encode(Command::act(BankId{}, 1u << 17), 1u << 17), Error);
    EXPECT_THROW(encode(Command::rd(BankId{}, 1024)), Error);
    EXPECT_THROW(encode(Command::mrs(8, 0)), Error);
    EXPECT_THROW(encode(Command::mrs(0, kA14)), Error);
}

TEST(DdrProtocol, DeselectIgnoresOtherLines) {
    SignalWord w;
    w.cs_n = true;
    w.addr = 0x3FFFF;
    EXPECT_EQ(decode(w), Command::des());
}

TEST(DdrProtocol, BankIdFlatRoundTrip) {
    for (unsigned i = 0; i < kBanks; ++i) EXPECT_EQ(BankId::from_flat(i).flat(), i);
}
