#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rhsim/cpu_model.hpp"
#include "rhsim/dram_device.hpp"
#include "rhsim/fault_injector.hpp"
#include "rhsim/mem_controller.hpp"

namespace rhsim {
class KvConfig;
}

namespace rhsim::inject {

/// What to hammer during an injection run.
struct Scenario {
    std::shared_ptr<const dram::DeviceProfile> profile;
    unsigned bank = 0;
    std::uint32_t aggressor = 0;
    /// Second row of the single-sided pair; default: far row in the same bank.
    std::optional<std::uint32_t> dummy;
    std::string sequence = "store-clflushopt-pair";
    cpu::Arch arch = cpu::Arch::Skylake;
    std::uint64_t victim_pattern = dram::kAllOnes;
    /// Default: complement of the victim pattern.
    std::optional<std::uint64_t> aggressor_pattern;
    std::optional<double> time_scale;  ///< default: the profile's
    std::uint64_t seed = 1;
    mc::ControllerConfig controller;
    bool capture = false;

    /// Keys: profile, bank, aggressor, dummy, sequence, arch, pattern,
    /// aggressor_pattern, time_scale, seed, controller.*.
    static Scenario from_config(const KvConfig& cfg);
};

/// Far row used as the partner of a single-sided hammer: half a bank away,
/// with row bit 14 cleared so the injector does not corrupt it.
std::uint32_t default_dummy(std::uint32_t aggressor, std::uint32_t rows_per_bank);

struct StepRecord {
    int number = 0;
    Picos start = 0;
    Picos end = 0;
};

struct InjectionReport {
    dram::FlipReport flips;
    std::vector<StepRecord> steps;
    std::uint32_t aggressor = 0;
    std::uint32_t dummy = 0;
    Picos hold_simulated = 0;
    std::uint64_t device_refs_during_hold = 0;
    std::uint64_t controller_refs_during_hold = 0;
    std::uint64_t controller_alerts_steps_2_to_6 = 0;
    std::uint64_t device_alerts_suppressed = 0;
    std::uint64_t recalibrations_after_step_7 = 0;
    std::uint64_t hammer_acts = 0;
    std::array<std::uint32_t, 7> boot_snapshot{};
    std::array<std::uint32_t, 7> final_registers{};
    std::vector<InjectorEvent> injector_log;

    bool registers_restored() const { return boot_snapshot == final_registers; }
    std::string summary() const;
};

/// Executes the eight-step script on a fresh testbed. Throws
/// Error(ScriptOrder) for malformed scripts and Error(Bit14Set) for
/// aggressor or dummy rows the held A14 line would corrupt.
InjectionReport run_protocol(const ProtocolScript& script, const Scenario& scenario);

}  // namespace rhsim::inject
