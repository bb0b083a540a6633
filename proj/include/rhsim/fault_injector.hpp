#pragma once

#include <string>
#include <vector>

#include "rhsim/ddr_protocol.hpp"
#include "rhsim/units.hpp"

namespace rhsim {
class KvConfig;
}

namespace rhsim::inject {

struct InjectorEvent {
    Picos t = 0;
    std::string what;
};

/// The interposer between controller and DIMM: a button that drives A14 low
/// and a switch that cuts ALERT_n.
class Injector {
  public:
    bool a14_held_low() const { return held_; }
    bool alert_suppressed() const { return suppressed_; }
    bool tap_pending() const { return tap_; }

    void press(Picos t);
    void release(Picos t);
    void set_alert_suppressed(bool on, Picos t);
    /// Holds A14 low for exactly the next command that drives A14 high.
    void tap(Picos t);

    ddr::SignalWord intercept(const ddr::SignalWord& w, Picos t);
    bool gate_alert(bool device_alert) const { return device_alert && !suppressed_; }

    const std::vector<InjectorEvent>& log() const { return log_; }
    std::uint64_t transformed() const { return transformed_; }

  private:
    bool held_ = false;
    bool suppressed_ = false;
    bool tap_ = false;
    std::uint64_t transformed_ = 0;
    std::vector<InjectorEvent> log_;
};

struct InjectorState {
    bool a14_held_low = false;
    bool alert_suppressed = false;
};

/// Stateless forms of the two signal paths.
ddr::SignalWord intercept(const ddr::SignalWord& w, const InjectorState& s);
bool gate_alert(bool device_alert, const InjectorState& s);

/// Steps: 1 boot, 2 suppress ALERT_n, 3 start hammering, 4 hold A14 low,
/// 5 stop hammering, 6 reconnect ALERT_n, 7 tap A14, 8 inspect.
struct ProtocolStep {
    int number = 0;
    Picos duration = 0;  ///< step 3: lead before the hold; step 4: hold; 5-7: settle

    friend bool operator==(const ProtocolStep&, const ProtocolStep&) = default;
};

struct ProtocolScript {
    std::vector<ProtocolStep> steps;

    /// Nominal hold is 15 s; settle steps default to two refresh intervals.
    static ProtocolScript standard(Picos hold = 15 * kPsPerSec, Picos lead = 0);
    /// `step = <n> [duration]` lines in order; missing durations take the
    /// standard values.
    static ProtocolScript from_config(const KvConfig& cfg);

    /// Throws Error(ScriptOrder) unless steps 1..8 each appear once, in order.
    void validate() const;
    Picos duration_of(int step) const;
    static const char* step_name(int step);
};

}  // namespace rhsim::inject
