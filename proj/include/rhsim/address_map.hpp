#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhsim/ddr_protocol.hpp"

namespace rhsim {
class KvConfig;
}

namespace rhsim::addr {

enum class Field : std::uint8_t { Byte, Column, Bank, Row, Rank, Dimm, Channel };

const char* field_name(Field f);

/// Physical bits [lo, lo + width) feed the next `width` bits of `field`.
/// A field may be assembled from several slices, least significant first.
struct Slice {
    Field field = Field::Byte;
    unsigned lo = 0;
    unsigned width = 0;
};

struct MappingConfig {
    std::vector<Slice> slices;
    std::uint64_t va_base = 0;  ///< pa = va + va_base

    /// byte pa[2:0], column pa[12:3], bank pa[16:13], row pa[top:17].
    static MappingConfig default_for(std::uint32_t rows_per_bank = 1u << 17);
    /// Reads `map.slice = <field> <lo>:<hi>` lines and `map.va_base`;
    /// falls back to the default layout when no slice is given.
    static MappingConfig from_config(const KvConfig& cfg, std::uint32_t rows_per_bank = 1u << 17);

    /// Total physical address width in bits.
    unsigned width() const;
    unsigned field_width(Field f) const;
    std::uint64_t memory_size() const { return std::uint64_t{1} << width(); }

    /// Throws Error(InvalidConfig) unless the slices are disjoint, cover
    /// [0, width) and keep column < 1024 and bank < 16.
    void validate() const;
};

struct LogicalAddr {
    unsigned channel = 0;
    unsigned dimm = 0;
    unsigned rank = 0;
    ddr::BankId bank{};
    std::uint32_t row = 0;
    std::uint16_t col = 0;
    std::uint8_t byte = 0;

    friend bool operator==(const LogicalAddr&, const LogicalAddr&) = default;
};

std::string to_string(const LogicalAddr& la);

/// Linear map used under UEFI: pa = va + base. Throws Error(OutOfRange).
std::uint64_t virt_to_phys(const MappingConfig& cfg, std::uint64_t va);
std::uint64_t phys_to_virt(const MappingConfig& cfg, std::uint64_t pa);

LogicalAddr phys_to_logical(const MappingConfig& cfg, std::uint64_t pa);
std::uint64_t logical_to_phys(const MappingConfig& cfg, const LogicalAddr& la);

}  // namespace rhsim::addr
