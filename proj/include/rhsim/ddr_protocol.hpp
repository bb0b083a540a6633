#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace rhsim::ddr {

constexpr std::uint32_t kAddrBits = 18;                 ///< A17..A0
constexpr std::uint32_t kAddrMask = (1u << kAddrBits) - 1;
constexpr std::uint32_t kColumns = 1024;                ///< words per row
constexpr std::uint32_t kBanks = 16;
constexpr std::uint32_t kModeRegisters = 8;

// Address lines shared with command selects.
constexpr std::uint32_t kA10 = 1u << 10;
constexpr std::uint32_t kA14 = 1u << 14;  // WE_n
constexpr std::uint32_t kA15 = 1u << 15;  // CAS_n
constexpr std::uint32_t kA16 = 1u << 16;  // RAS_n
constexpr std::uint32_t kCommandLines = kA14 | kA15 | kA16;

/// Bank group + bank address. Flat index is group*4 + bank.
struct BankId {
    std::uint8_t group = 0;
    std::uint8_t bank = 0;

    constexpr unsigned flat() const { return group * 4u + bank; }
    static BankId from_flat(unsigned flat);
    friend constexpr bool operator==(BankId, BankId) = default;
};

enum class CommandKind : std::uint8_t { Des, Mrs, Ref, Pre, Prea, Act, Wr, Rd };

const char* mnemonic(CommandKind kind);

/// A decoded DDR4 command. Fields outside the kind's payload stay zero so that
/// value equality matches command equality.
struct Command {
    CommandKind kind = CommandKind::Des;
    BankId bank{};
    std::uint32_t row = 0;          ///< ACT
    std::uint16_t col = 0;          ///< RD/WR
    bool auto_precharge = false;    ///< RD/WR with A10 high
    std::uint8_t mode_register = 0; ///< MRS
    std::uint32_t payload = 0;      ///< MRS op-code (address lines, A16..A14 low)

    static Command des() { return {}; }
    static Command ref() { return {CommandKind::Ref}; }
    static Command prea() { return {CommandKind::Prea}; }
    static Command pre(BankId b) { return {CommandKind::Pre, b}; }
    static Command act(BankId b, std::uint32_t row) { return {CommandKind::Act, b, row}; }
    static Command rd(BankId b, std::uint16_t col, bool ap = false) {
        return {CommandKind::Rd, b, 0, col, ap};
    }
    static Command wr(BankId b, std::uint16_t col, bool ap = false) {
        return {CommandKind::Wr, b, 0, col, ap};
    }
    static Command mrs(std::uint8_t reg, std::uint32_t payload) {
        Command c{CommandKind::Mrs};
        c.mode_register = reg;
        c.payload = payload;
        return c;
    }

    friend bool operator==(const Command&, const Command&) = default;
};

std::string to_string(const Command& cmd);

/// One sample of the command/address bus. The 18-bit `addr` field holds
/// A17..A0; A16/A15/A14 are the RAS_n/CAS_n/WE_n lines, so the accessors
/// below read the same bits.
struct SignalWord {
    bool cs_n = true;
    bool act_n = true;
    std::uint32_t addr = 0;
    std::uint8_t bg = 0;  ///< 2 bits
    std::uint8_t ba = 0;  ///< 2 bits
    bool parity = false;

    bool ras_a16() const { return addr & kA16; }
    bool cas_a15() const { return addr & kA15; }
    bool we_a14() const { return addr & kA14; }
    bool a10() const { return addr & kA10; }

    friend bool operator==(const SignalWord&, const SignalWord&) = default;
};

/// Even parity over ACT_n, A17..A0 (including RAS/CAS/WE), BG and BA.
bool compute_parity(const SignalWord& w);

enum class ParityResult { Pass, Fail };

ParityResult check_parity(const SignalWord& w);

/// Drives the bus for `cmd`; parity is filled in. Throws Error(OutOfRange)
/// for rows beyond `row_limit`, columns >= 1024, banks >= 16, MRS register > 7
/// or MRS payloads touching A16..A14.
SignalWord encode(const Command& cmd, std::uint32_t row_limit = 1u << kAddrBits);

/// Inverse of encode on command-significant bits. CS_n high (and NOP, ZQ)
/// decode as DES. Throws Error(UnknownCommand) for the reserved encoding.
Command decode(const SignalWord& w);

/// Forces WE_n/A14 low when `held_low`. Parity is left as the controller
/// computed it.
SignalWord apply_a14_fault(SignalWord w, bool held_low);

/// Rows of the reproduced command truth table, for the debug subcommand and
/// exhaustive table walks in tests.
struct TruthTableRow {
    const char* name;
    char cs_n, act_n, ras, cas, we, a10;  ///< 'H', 'L' or 'X'
    const char* decodes_as;
};

const std::array<TruthTableRow, 11>& truth_table();

std::string format_truth_table();

}  // namespace rhsim::ddr
