#include "rhsim/address_map.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/units.hpp"

namespace rhsim::addr {

const char* field_name(Field f) {
    switch (f) {
        case Field::Byte: return "byte";
        case Field::Column: return "column";
        case Field::Bank: return "bank";
        case Field::Row: return "row";
        case Field::Rank: return "rank";
        case Field::Dimm: return "dimm";
        case Field::Channel: return "channel";
    }
    return "?";
}

namespace {

Field parse_field(const std::string& s) {
    for (auto f : {Field::Byte, Field::Column, Field::Bank, Field::Row, Field::Rank, Field::Dimm, Field::Channel})
        if (s == field_name(f)) return f;
    throw Error(Errc::Parse, "unknown address field '" + s + "'");
}

unsigned log2_exact(std::uint32_t v) {
    if (v == 0 || !std::has_single_bit(v)) throw Error(Errc::InvalidConfig, "rows_per_bank must be a power of two");
    return static_cast<unsigned>(std::countr_zero(v));
}

}  // namespace

MappingConfig MappingConfig::default_for(std::uint32_t rows_per_bank) {
    MappingConfig c;
    c.slices = {{Field::Byte, 0, 3}, {Field::Column, 3, 10}, {Field::Bank, 13, 4}, {Field::Row, 17, log2_exact(rows_per_bank)}};
    return c;
}

MappingConfig MappingConfig::from_config(const KvConfig& cfg, std::uint32_t rows_per_bank) {
    auto lines = cfg.all("map.slice");
    MappingConfig c = lines.empty() ? default_for(rows_per_bank) : MappingConfig{};
    for (const auto* e : lines) {
        auto parts = split_ws(e->value);
        auto colon = parts.size() == 2 ? parts[1].find(':') : std::string::npos;
        if (colon == std::string::npos)
            throw Error(Errc::Parse, "line " + std::to_string(e->line) + ": expected '<field> <lo>:<hi>'");
        unsigned lo = static_cast<unsigned>(parse_uint(parts[1].substr(0, colon)));
        unsigned hi = static_cast<unsigned>(parse_uint(parts[1].substr(colon + 1)));
        if (hi < lo) throw Error(Errc::Parse, "line " + std::to_string(e->line) + ": hi < lo");
        c.slices.push_back({parse_field(parts[0]), lo, hi - lo + 1});
    }
    if (auto v = cfg.get("map.va_base")) c.va_base = parse_uint(*v);
    c.validate();
    return c;
}

unsigned MappingConfig::width() const {
    unsigned w = 0;
    for (const auto& s : slices) w += s.width;
    return w;
}

unsigned MappingConfig::field_width(Field f) const {
    unsigned w = 0;
    for (const auto& s : slices)
        if (s.field == f) w += s.width;
    return w;
}

void MappingConfig::validate() const {
    const unsigned w = width();
    if (w == 0 || w > 48) throw Error(Errc::InvalidConfig, "address width must be 1..48 bits");
    std::uint64_t covered = 0;
    for (const auto& s : slices) {
        if (s.width == 0) throw Error(Errc::InvalidConfig, "empty slice");
        if (s.lo + s.width > w) throw Error(Errc::InvalidConfig, "slice beyond address width");
        std::uint64_t mask = ((std::uint64_t{1} << s.width) - 1) << s.lo;
        if (covered & mask) throw Error(Errc::InvalidConfig, "overlapping slices");
        covered |= mask;
    }
    if (field_width(Field::Column) > 10) throw Error(Errc::InvalidConfig, "column field wider than 10 bits");
    if (field_width(Field::Bank) > 4) throw Error(Errc::InvalidConfig, "bank field wider than 4 bits");
    if (field_width(Field::Byte) > 3) throw Error(Errc::InvalidConfig, "byte field wider than 3 bits");
    if (field_width(Field::Row) > ddr::kAddrBits) throw Error(Errc::InvalidConfig, "row field wider than 18 bits");
}

std::string to_string(const LogicalAddr& la) {
    std::ostringstream os;
    os << "ch=" << la.channel << " dimm=" << la.dimm << " rank=" << la.rank << " bg=" << int(la.bank.group)
       << " ba=" << int(la.bank.bank) << " row=" << to_hex(la.row) << " col=" << to_hex(la.col)
       << " byte=" << int(la.byte);
    return os.str();
}

std::uint64_t virt_to_phys(const MappingConfig& cfg, std::uint64_t va) {
    std::uint64_t pa = va + cfg.va_base;
    if (pa < va || pa >= cfg.memory_size()) throw Error(Errc::OutOfRange, "virtual address " + to_hex(va));
    return pa;
}

std::uint64_t phys_to_virt(const MappingConfig& cfg, std::uint64_t pa) {
    if (pa < cfg.va_base || pa >= cfg.memory_size()) throw Error(Errc::OutOfRange, "physical address " + to_hex(pa));
    return pa - cfg.va_base;
}

LogicalAddr phys_to_logical(const MappingConfig& cfg, std::uint64_t pa) {
    if (pa >= cfg.memory_size()) throw Error(Errc::OutOfRange, "physical address " + to_hex(pa));
    std::uint64_t vals[7] = {};
    unsigned fill[7] = {};
    for (const auto& s : cfg.slices) {
        auto i = static_cast<unsigned>(s.field);
        vals[i] |= ((pa >> s.lo) & ((std::uint64_t{1} << s.width) - 1)) << fill[i];
        fill[i] += s.width;
    }
    LogicalAddr la;
    la.byte = static_cast<std::uint8_t>(vals[0]);
    la.col = static_cast<std::uint16_t>(vals[1]);
    la.bank = ddr::BankId::from_flat(static_cast<unsigned>(vals[2]));
    la.row = static_cast<std::uint32_t>(vals[3]);
    la.rank = static_cast<unsigned>(vals[4]);
    la.dimm = static_cast<unsigned>(vals[5]);
    la.channel = static_cast<unsigned>(vals[6]);
    return la;
}

std::uint64_t logical_to_phys(const MappingConfig& cfg, const LogicalAddr& la) {
    const std::uint64_t vals[7] = {la.byte, la.col, la.bank.flat(), la.row, la.rank, la.dimm, la.channel};
    unsigned fill[7] = {};
    std::uint64_t pa = 0;
    for (const auto& s : cfg.slices) {
        auto i = static_cast<unsigned>(s.field);
        pa |= ((vals[i] >> fill[i]) & ((std::uint64_t{1} << s.width) - 1)) << s.lo;
        fill[i] += s.width;
    }
    for (unsigned i = 0; i < 7; ++i) {
        if (fill[i] < 64 && (vals[i] >> fill[i]) != 0)
            throw Error(Errc::OutOfRange, std::string(field_name(static_cast<Field>(i))) + " value does not fit the map");
    }
    return pa;
}

}  // namespace rhsim::addr
