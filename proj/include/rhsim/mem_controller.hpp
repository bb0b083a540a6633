#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rhsim/address_map.hpp"
#include "rhsim/cpu_model.hpp"
#include "rhsim/ddr_protocol.hpp"
#include "rhsim/timing.hpp"

namespace rhsim {
class KvConfig;
}

namespace rhsim::mc {

constexpr double kMaxRefreshMultiplier = 3.5;

struct ControllerConfig {
    bool scrambling = false;
    bool parity_enabled = true;
    double refresh_multiplier = 1.0;  ///< REF interval = t_refi * multiplier
    std::uint64_t scramble_key = 0x5EED5C4A3B1E0001ULL;

    void validate() const;
    static ControllerConfig from_config(const KvConfig& cfg);

    /// Mode register values written at boot and on recalibration (MR0..MR6).
    std::array<std::uint32_t, 7> boot_mode_registers() const;
};

struct TimedCommand {
    Picos t = 0;
    ddr::Command cmd;
    std::uint64_t data = 0;  ///< WR payload as driven on the data bus
};

struct BankState {
    std::optional<std::uint32_t> open_row;
    timing::BankTiming timing;
};

/// XOR with an address-keyed keystream; applying it twice is the identity.
std::uint64_t scramble(std::uint64_t word, std::uint64_t key, unsigned bank, std::uint32_t row, unsigned col);

/// Open-page, first-come first-served controller for one rank. Requests must
/// arrive in non-decreasing time order; periodic REFs (preceded by PREA when
/// a row is open) are interleaved as time advances.
class Controller {
  public:
    Controller(ControllerConfig cfg, timing::TimingParams timing, addr::MappingConfig map);

    const ControllerConfig& config() const { return cfg_; }
    const timing::TimingParams& timing() const { return timing_; }
    const addr::MappingConfig& map() const { return map_; }

    /// MRS writes of every boot register value.
    void boot(Picos t, std::vector<TimedCommand>& out);

    /// Issues every REF whose start time is <= t.
    void refresh_until(Picos t, std::vector<TimedCommand>& out);

    /// Translates one request; returns the time its access was issued.
    /// `data` is the unscrambled store value for writes.
    Picos submit(const cpu::MemoryRequest& req, std::vector<TimedCommand>& out, std::uint64_t data = 0);

    /// Recalibration after a forwarded ALERT_n: close rows and restore the
    /// boot mode registers.
    void on_alert(Picos t, std::vector<TimedCommand>& out);

    /// Descrambles a word read back from (bank, row, col).
    std::uint64_t read_back(std::uint64_t raw, unsigned bank, std::uint32_t row, unsigned col) const;

    Picos next_refresh() const { return next_ref_; }
    Picos refresh_interval() const { return schedule_.interval(); }
    std::uint64_t refs_issued() const { return refs_issued_; }
    const std::vector<Picos>& recalibrations() const { return recalibrations_; }
    const BankState& bank(unsigned b) const { return banks_.at(b); }
    Picos bus_time() const { return bus_time_; }

  private:
    void emit(std::vector<TimedCommand>& out, Picos t, const ddr::Command& cmd, std::uint64_t data = 0);
    bool any_open() const;

    ControllerConfig cfg_;
    timing::TimingParams timing_;
    addr::MappingConfig map_;
    timing::RefreshSchedule schedule_;
    std::array<BankState, ddr::kBanks> banks_{};
    Picos next_ref_ = 0;
    Picos bus_time_ = 0;
    std::uint64_t refs_issued_ = 0;
    std::vector<Picos> recalibrations_;
};

}  // namespace rhsim::mc
