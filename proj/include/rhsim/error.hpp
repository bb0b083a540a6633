#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rhsim {

/// Error categories raised across the toolkit. Tests and the CLI switch on these.
enum class Errc {
    OutOfRange,          ///< payload or address outside geometry bounds
    UnknownCommand,      ///< reserved DDR4 encoding on the bus
    ProtocolViolation,   ///< illegal command order seen by the device
    UnknownSequence,
    UnsupportedArch,
    AddressesSameRow,
    AddressesDifferentBanks,
    InsufficientRefs,
    InsufficientActs,
    Parse,
    Bit14Set,
    AmbiguousSupport,
    MissingAdjacency,
    ScriptOrder,
    InvalidConfig,
    Usage,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

inline const char* to_string(Errc code) {
    switch (code) {
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::UnknownCommand: return "UnknownCommand";
        case Errc::ProtocolViolation: return "ProtocolViolation";
        case Errc::UnknownSequence: return "UnknownSequence";
        case Errc::UnsupportedArch: return "UnsupportedArch";
        case Errc::AddressesSameRow: return "AddressesSameRow";
        case Errc::AddressesDifferentBanks: return "AddressesDifferentBanks";
        case Errc::InsufficientRefs: return "InsufficientRefs";
        case Errc::InsufficientActs: return "InsufficientActs";
        case Errc::Parse: return "ParseError";
        case Errc::Bit14Set: return "Bit14Set";
        case Errc::AmbiguousSupport: return "AmbiguousSupport";
        case Errc::MissingAdjacency: return "MissingAdjacency";
        case Errc::ScriptOrder: return "ScriptOrder";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::Usage: return "Usage";
    }
    return "Unknown";
}

}  // namespace rhsim
