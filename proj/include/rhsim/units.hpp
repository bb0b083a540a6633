#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rhsim {

/// Simulation time. Integer picoseconds represent 46.7ns and 7812.5ns exactly.
using Picos = std::int64_t;

constexpr Picos kPsPerNs = 1'000;
constexpr Picos kPsPerUs = 1'000'000;
constexpr Picos kPsPerMs = 1'000'000'000;
constexpr Picos kPsPerSec = 1'000'000'000'000;

/// Parses "46.7ns", "15s", "128ms", "7812500" (bare = ps), and "<n>trefi" when
/// a tREFI length is supplied. Throws Error(Errc::Parse).
Picos parse_duration(std::string_view text, Picos t_refi = 0);

std::string format_duration(Picos ps);

/// Parses decimal or 0x-prefixed hex. Throws Error(Errc::Parse).
std::uint64_t parse_uint(std::string_view text);

std::string to_hex(std::uint64_t v, int min_digits = 1);

}  // namespace rhsim
