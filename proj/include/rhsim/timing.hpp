#pragma once

#include <optional>
#include <vector>

#include "rhsim/units.hpp"

namespace rhsim {
class KvConfig;
}

namespace rhsim::timing {

/// JEDEC-derived timing envelope. Only the ACT-to-ACT floor and refresh are
/// modeled; tRCD/tRP/tCAS live inside t_rc.
struct TimingParams {
    Picos t_rc = 46'700;             ///< observed ACT-to-ACT floor, one bank
    Picos t_refi = 7'812'500;        ///< refresh_window / refresh_count
    Picos t_rfc = 350'000;           ///< REF blocks every bank for this long
    Picos refresh_window = 64 * kPsPerMs;
    int refresh_count = 8192;

    /// Throws Error(InvalidConfig) if the invariants do not hold.
    void validate() const;

    /// Reads `timing.*` keys; missing keys keep defaults.
    static TimingParams from_config(const KvConfig& cfg);
};

/// Optimal rate: activations that fit into one refresh interval.
double optimal_act_rate(const TimingParams& p);

/// Upper bound on ACTs admitted to one bank between two REFs.
long max_acts_per_refresh_window(const TimingParams& p);

struct SimClock {
    Picos now = 0;

    /// Monotone advance; earlier timestamps are ignored.
    void advance_to(Picos t) {
        if (t > now) now = t;
    }
};

struct Interval {
    Picos start = 0;
    Picos end = 0;  ///< exclusive

    bool contains(Picos t) const { return t >= start && t < end; }
};

/// Periodic all-bank refresh: REF k starts at k * interval (k >= 1).
class RefreshSchedule {
  public:
    RefreshSchedule() = default;
    RefreshSchedule(const TimingParams& p, double multiplier = 1.0, std::vector<Interval> suppressed = {});

    Picos interval() const { return interval_; }
    Picos t_rfc() const { return t_rfc_; }

    /// Start of the first REF at or after t.
    Picos next_start(Picos t) const;
    /// The REF window covering t, if any (suppressed REFs never block).
    std::optional<Interval> window_at(Picos t) const;
    bool suppressed(Picos ref_start) const;

  private:
    Picos interval_ = 7'812'500;
    Picos t_rfc_ = 350'000;
    std::vector<Interval> suppressed_;
};

struct BankTiming {
    std::optional<Picos> last_act;
};

/// Earliest time an ACT requested at `requested` may issue: no sooner than
/// t_rc after the bank's previous ACT and never inside a REF window.
Picos admit_act(const BankTiming& bank, Picos requested, const RefreshSchedule& refresh, Picos t_rc);

/// REF occurrences in [0, horizon]: every multiple of the interval not inside
/// a suppressed window. Each occupies [start, start + t_rfc).
std::vector<Interval> refresh_events(const TimingParams& p, Picos horizon, const std::vector<Interval>& suppressed = {},
                                     double multiplier = 1.0);

}  // namespace rhsim::timing
