#include "rhsim/ddr_protocol.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

#include "rhsim/error.hpp"
#include "rhsim/units.hpp"

namespace rhsim::ddr {

BankId BankId::from_flat(unsigned flat) {
    if (flat >= kBanks) throw Error(Errc::OutOfRange, "bank index " + std::to_string(flat));
    return BankId{static_cast<std::uint8_t>(flat / 4), static_cast<std::uint8_t>(flat % 4)};
}

const char* mnemonic(CommandKind kind) {
    switch (kind) {
        case CommandKind::Des: return "DES";
        case CommandKind::Mrs: return "MRS";
        case CommandKind::Ref: return "REF";
        case CommandKind::Pre: return "PRE";
        case CommandKind::Prea: return "PREA";
        case CommandKind::Act: return "ACT";
        case CommandKind::Wr: return "WR";
        case CommandKind::Rd: return "RD";
    }
    return "?";
}

std::string to_string(const Command& cmd) {
    std::ostringstream os;
    os << mnemonic(cmd.kind);
    switch (cmd.kind) {
        case CommandKind::Act:
            os << " bg=" << int(cmd.bank.group) << " ba=" << int(cmd.bank.bank) << " row=" << to_hex(cmd.row);
            break;
        case CommandKind::Rd:
        case CommandKind::Wr:
            os << (cmd.auto_precharge ? "A" : "") << " bg=" << int(cmd.bank.group) << " ba=" << int(cmd.bank.bank)
               << " col=" << to_hex(cmd.col);
            break;
        case CommandKind::Pre:
            os << " bg=" << int(cmd.bank.group) << " ba=" << int(cmd.bank.bank);
            break;
        case CommandKind::Mrs:
            os << " MR" << int(cmd.mode_register) << " payload=" << to_hex(cmd.payload);
            break;
        default:
            break;
    }
    return os.str();
}

bool compute_parity(const SignalWord& w) {
    unsigned ones = std::popcount(w.addr & kAddrMask) + std::popcount(static_cast<unsigned>(w.bg & 3u)) +
                    std::popcount(static_cast<unsigned>(w.ba & 3u)) + (w.act_n ? 1u : 0u);
    return ones & 1u;
}

ParityResult check_parity(const SignalWord& w) {
    return compute_parity(w) == w.parity ? ParityResult::Pass : ParityResult::Fail;
}

namespace {

void check_bank(BankId b) {
    if (b.group > 3 || b.bank > 3)
        throw Error(Errc::OutOfRange, "bank group/bank " + std::to_string(b.group) + "/" + std::to_string(b.bank));
}

void set_bank(SignalWord& w, BankId b) {
    check_bank(b);
    w.bg = b.group;
    w.ba = b.bank;
}

constexpr std::uint32_t selects(bool ras, bool cas, bool we) {
    return (ras ? kA16 : 0u) | (cas ? kA15 : 0u) | (we ? kA14 : 0u);
}

}  // namespace

SignalWord encode(const Command& cmd, std::uint32_t row_limit) {
    SignalWord w;
    w.cs_n = false;
    switch (cmd.kind) {
        case CommandKind::Des:
            w.cs_n = true;
            break;
        case CommandKind::Act:
            if (cmd.row >= row_limit || cmd.row > kAddrMask)
                throw Error(Errc::OutOfRange, "row " + to_hex(cmd.row) + " beyond row limit " + to_hex(row_limit));
            set_bank(w, cmd.bank);
            w.act_n = false;
            w.addr = cmd.row;
            break;
        case CommandKind::Rd:
        case CommandKind::Wr:
            if (cmd.col >= kColumns) throw Error(Errc::OutOfRange, "column " + std::to_string(cmd.col));
            set_bank(w, cmd.bank);
            w.addr = selects(true, false, cmd.kind == CommandKind::Rd) | cmd.col | (cmd.auto_precharge ? kA10 : 0u);
            break;
        case CommandKind::Pre:
            set_bank(w, cmd.bank);
            w.addr = selects(false, true, false);
            break;
        case CommandKind::Prea:
            w.addr = selects(false, true, false) | kA10;
            break;
        case CommandKind::Ref:
            w.addr = selects(false, false, true);
            break;
        case CommandKind::Mrs:
            if (cmd.mode_register >= kModeRegisters)
                throw Error(Errc::OutOfRange, "mode register " + std::to_string(cmd.mode_register));
            if (cmd.payload > kAddrMask || (cmd.payload & kCommandLines))
                throw Error(Errc::OutOfRange, "MRS payload " + to_hex(cmd.payload));
            // MR select is BG0:BA1:BA0.
            w.bg = (cmd.mode_register >> 2) & 1u;
            w.ba = cmd.mode_register & 3u;
            w.addr = cmd.payload;
            break;
    }
    w.parity = compute_parity(w);
    return w;
}

Command decode(const SignalWord& w) {
    if (w.cs_n) return Command::des();
    const BankId bank{static_cast<std::uint8_t>(w.bg & 3u), static_cast<std::uint8_t>(w.ba & 3u)};
    if (!w.act_n) return Command::act(bank, w.addr & kAddrMask);

    const bool ras = w.ras_a16(), cas = w.cas_a15(), we = w.we_a14();
    const auto col = static_cast<std::uint16_t>(w.addr & (kColumns - 1));
    if (!ras && !cas && !we) {
        return Command::mrs(static_cast<std::uint8_t>(((w.bg & 1u) << 2) | (w.ba & 3u)), w.addr & kAddrMask);
    }
    if (!ras && !cas && we) return Command::ref();
    if (!ras && cas && !we) return w.a10() ? Command::prea() : Command::pre(bank);
    if (!ras && cas && we) throw Error(Errc::UnknownCommand, "reserved encoding (RFU) act_n=H ras=L cas=H we=H");
    if (ras && !cas && !we) return Command::wr(bank, col, w.a10());
    if (ras && !cas && we) return Command::rd(bank, col, w.a10());
    // ZQ calibration (H H L) and NOP (H H H): never issued by our scenarios.
    return Command::des();
}

SignalWord apply_a14_fault(SignalWord w, bool held_low) {
    if (held_low) w.addr &= ~kA14;
    return w;
}

const std::array<TruthTableRow, 11>& truth_table() {
    static const std::array<TruthTableRow, 11> table{{
        {"DES", 'H', 'X', 'X', 'X', 'X', 'X', "DES"},
        {"MRS", 'L', 'H', 'L', 'L', 'L', 'X', "MRS (register = BG0:BA1:BA0)"},
        {"REF", 'L', 'H', 'L', 'L', 'H', 'X', "REF"},
        {"SRE", 'L', 'H', 'L', 'L', 'H', 'X', "not modeled (CKE); bus view = REF"},
        {"PRE", 'L', 'H', 'L', 'H', 'L', 'L', "PRE"},
        {"PREA", 'L', 'H', 'L', 'H', 'L', 'H', "PREA"},
        {"RFU", 'L', 'H', 'L', 'H', 'H', 'X', "UnknownCommand error"},
        {"ACT", 'L', 'L', 'R', 'R', 'R', 'R', "ACT (RAS/CAS/WE carry row A16..A14)"},
        {"WR", 'L', 'H', 'H', 'L', 'L', 'V', "WR (A10 = auto-precharge)"},
        {"RD", 'L', 'H', 'H', 'L', 'H', 'V', "RD (A10 = auto-precharge)"},
        {"ZQC/NOP", 'L', 'H', 'H', 'H', 'X', 'X', "DES"},
    }};
    return table;
}

std::string format_truth_table() {
    std::ostringstream os;
    os << "command  CS_n ACT_n RAS/A16 CAS/A15 WE/A14 A10  decodes as\n";
    for (const auto& r : truth_table()) {
        char line[160];
        std::snprintf(line, sizeof line, "%-8s %-4c %-5c %-7c %-7c %-6c %-4c %s\n", r.name, r.cs_n, r.act_n, r.ras,
                      r.cas, r.we, r.a10, r.decodes_as);
        os << line;
    }
    os << "\nA14 held low: REF -> MRS(MR0, payload 0), RD -> WR, WR -> WR, PRE -> PRE, ACT -> ACT with row bit 14 cleared\n";
    return os.str();
}

}  // namespace rhsim::ddr
