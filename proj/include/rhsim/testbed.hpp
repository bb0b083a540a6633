#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "rhsim/address_map.hpp"
#include "rhsim/bus_analyzer.hpp"
#include "rhsim/cpu_model.hpp"
#include "rhsim/dram_device.hpp"
#include "rhsim/fault_injector.hpp"
#include "rhsim/mem_controller.hpp"

namespace rhsim::sim {

struct TestbedConfig {
    mc::ControllerConfig controller;
    std::optional<addr::MappingConfig> map;  ///< default: derived from the profile geometry
    std::uint64_t seed = 1;
    bool capture = true;
    bus::Trigger trigger = bus::Trigger::any();
    std::optional<double> time_scale;  ///< default: the profile's
};

/// One hart replaying a sequence profile in closed loop: when the
/// controller holds a request back, every later request shifts with it.
struct Hart {
    cpu::RequestStream stream;
    std::array<std::uint64_t, 2> store_data{};  ///< per address slot, for writes
    std::array<std::uint64_t, 2> va{};
    Picos shift = 0;
    std::optional<cpu::MemoryRequest> pending;
    std::uint64_t issued = 0;
    bool started = false;

    Hart(cpu::RequestStream s, std::array<std::uint64_t, 2> addrs) : stream(std::move(s)), va(addrs) {}
    std::optional<Picos> next_time();
};

/// Controller, injector, device and analyzer wired on one command bus.
class Testbed {
  public:
    Testbed(std::shared_ptr<const dram::DeviceProfile> profile, TestbedConfig cfg);

    dram::Device& device() { return device_; }
    const dram::Device& device() const { return device_; }
    mc::Controller& controller() { return controller_; }
    inject::Injector& injector() { return injector_; }
    bus::BusAnalyzer& analyzer() { return analyzer_; }
    const addr::MappingConfig& map() const { return map_; }
    double time_scale() const { return time_scale_; }
    std::uint64_t seed() const { return cfg_.seed; }

    void boot(Picos t = 0);
    Picos now() const { return controller_.bus_time(); }

    /// Encodes, passes through the injector, executes on the device and
    /// records; a forwarded alert triggers recalibration.
    void deliver(const mc::TimedCommand& tc);
    /// Advances the idle bus to `t` (periodic REFs only).
    void idle_until(Picos t);

    std::uint64_t va_of(unsigned bank, std::uint32_t row, unsigned col = 0) const;

    /// Hart hammering rows a and b of `bank` with `profile` from `start`.
    Hart make_hart(const cpu::SequenceProfile& profile, unsigned bank, std::uint32_t row_a, std::uint32_t row_b,
                   Picos start, Picos duration, std::uint64_t seed);
    /// Feeds requests whose (shifted) time is < until, then idles to `until`.
    void advance(Hart& hart, Picos until);
    void advance(std::vector<Hart*> harts, Picos until);
    /// Runs the hart to exhaustion.
    void run(Hart& hart);

    /// Resolves flips; elapsed time without REF is scaled by time_scale.
    dram::FlipReport inspect();

    std::uint64_t alerts_raised() const { return alerts_raised_; }
    const std::vector<Picos>& alerts_forwarded() const { return alerts_forwarded_; }

  private:
    void submit(Hart& h);
    void flush();

    std::shared_ptr<const dram::DeviceProfile> profile_;
    TestbedConfig cfg_;
    addr::MappingConfig map_;
    double time_scale_;
    mc::Controller controller_;
    dram::Device device_;
    inject::Injector injector_;
    bus::BusAnalyzer analyzer_;
    std::vector<mc::TimedCommand> buf_;
    std::vector<mc::TimedCommand> alert_buf_;
    std::uint64_t alerts_raised_ = 0;
    std::vector<Picos> alerts_forwarded_;
};

struct SequenceRun {
    bus::Trace trace;  ///< device side
    std::uint64_t requests = 0;
    std::uint64_t candidates = 0;  ///< stream accesses before cache-hit suppression
    std::uint64_t hits = 0;
    Picos end = 0;
};

/// Boots a fresh testbed and replays `seq` against rows a and b of `bank`
/// for `duration`, starting one microsecond after boot.
SequenceRun simulate_sequence(std::shared_ptr<const dram::DeviceProfile> profile, const cpu::SequenceProfile& seq,
                              unsigned bank, std::uint32_t row_a, std::uint32_t row_b, Picos duration,
                              std::uint64_t seed, const mc::ControllerConfig& controller = {});

}  // namespace rhsim::sim
