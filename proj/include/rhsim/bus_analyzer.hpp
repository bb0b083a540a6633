#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhsim/ddr_protocol.hpp"
#include "rhsim/units.hpp"

namespace rhsim::bus {

struct TraceRecord {
    Picos t = 0;
    ddr::Command cmd;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

/// Command/address predicate. Unset fields match anything.
struct Trigger {
    std::optional<ddr::CommandKind> kind;
    std::optional<unsigned> bank;  ///< flat bank index
    std::optional<std::uint32_t> row;

    bool matches(const ddr::Command& c) const;
    static Trigger any() { return {}; }
    /// "any", "ACT", "ACT:bank=3", "ACT:bank=3:row=0x11410", "REF".
    static Trigger parse(const std::string& text);
};

/// All records from the first trigger match onward.
Trace capture(const Trace& stream, const Trigger& trigger);

/// Streaming capture at the interposer: device-side records (post-injector,
/// canonical) and the controller-side twin.
class BusAnalyzer {
  public:
    explicit BusAnalyzer(Trigger trigger = Trigger::any(), bool enabled = true)
        : trigger_(trigger), enabled_(enabled) {}

    void set_enabled(bool on) { enabled_ = on; }
    bool enabled() const { return enabled_; }
    void set_trigger(const Trigger& t) {
        trigger_ = t;
        armed_ = false;
    }
    void clear();

    void record(Picos t, const ddr::Command& controller_side, const ddr::Command& device_side);

    const Trace& device_trace() const { return device_; }
    const Trace& controller_trace() const { return controller_; }

  private:
    Trigger trigger_;
    bool enabled_;
    bool armed_ = false;
    Trace device_;
    Trace controller_;
};

/// ACT counts between consecutive REF records. Throws InsufficientRefs.
std::vector<long> acts_per_trefi(const Trace& trace);

struct LatencyOptions {
    /// Deltas whose interval contains a REF are reported separately.
    bool exclude_refresh_straddle = true;
};

struct LatencyDistribution {
    std::vector<Picos> deltas;             ///< sorted ascending
    std::vector<Picos> refresh_straddles;  ///< sorted, excluded from `deltas`

    /// Nearest-rank percentile, q in [0, 100].
    Picos percentile(double q) const;
    double mean() const;
    double fraction_within(Picos center, Picos tolerance) const;
    double fraction_in(Picos lo, Picos hi) const;  ///< closed range
    /// Median delta of the most populated bin of `bin` ps.
    Picos mode(Picos bin = 1'000) const;
};

/// Consecutive ACT-to-ACT deltas. Throws InsufficientActs for fewer than two
/// ACTs (or no delta left after exclusion).
LatencyDistribution act_latency_cdf(const Trace& trace, const LatencyOptions& opt = {});

struct Summary {
    double mean = 0;
    double p50 = 0, p90 = 0, p99 = 0;
    double min = 0, max = 0;
    std::size_t count = 0;
};

Summary summarize(std::vector<double> values);

/// `t_ps,cmd,bg,ba,row,col` with hex row/col; MRS puts the register in
/// bg:ba and the payload in row. RD/WR with auto-precharge use RDA/WRA.
std::string export_csv(const Trace& trace);
/// Throws Error(Parse) naming the offending line.
Trace import_csv(const std::string& text);

/// window,acts
std::string rate_csv(const std::vector<long>& acts);
/// delta_ps,cdf (one row per delta, gnuplot friendly)
std::string cdf_csv(const LatencyDistribution& d);

}  // namespace rhsim::bus
