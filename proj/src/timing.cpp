#include "rhsim/timing.hpp"

#include <algorithm>
#include <cmath>

#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"

namespace rhsim::timing {

void TimingParams::validate() const {
    if (t_rc <= 0) throw Error(Errc::InvalidConfig, "t_rc must be positive");
    if (t_refi <= 0 || refresh_count <= 0) throw Error(Errc::InvalidConfig, "t_refi and refresh_count must be positive");
    if (t_rfc < 0 || t_rfc >= t_refi) throw Error(Errc::InvalidConfig, "t_rfc must be below t_refi");
    if (t_refi * refresh_count != refresh_window)
        throw Error(Errc::InvalidConfig, "t_refi must equal refresh_window / refresh_count");
}

TimingParams TimingParams::from_config(const KvConfig& cfg) {
    TimingParams p;
    if (auto v = cfg.get("timing.t_rc")) p.t_rc = parse_duration(*v);
    if (auto v = cfg.get("timing.t_rfc")) p.t_rfc = parse_duration(*v);
    if (auto v = cfg.get("timing.refresh_window")) p.refresh_window = parse_duration(*v);
    if (auto v = cfg.get("timing.refresh_count")) p.refresh_count = static_cast<int>(parse_uint(*v));
    if (auto v = cfg.get("timing.t_refi")) {
        p.t_refi = parse_duration(*v);
    } else {
        p.t_refi = p.refresh_window / p.refresh_count;
    }
    p.validate();
    return p;
}

double optimal_act_rate(const TimingParams& p) {
    return static_cast<double>(p.t_refi) / static_cast<double>(p.t_rc);
}

long max_acts_per_refresh_window(const TimingParams& p) {
    return static_cast<long>((p.t_refi - p.t_rfc) / p.t_rc) + 1;
}

RefreshSchedule::RefreshSchedule(const TimingParams& p, double multiplier, std::vector<Interval> suppressed)
    : interval_(static_cast<Picos>(std::llround(static_cast<double>(p.t_refi) * multiplier))),
      t_rfc_(p.t_rfc),
      suppressed_(std::move(suppressed)) {
    if (multiplier < 1.0) throw Error(Errc::InvalidConfig, "refresh multiplier must be >= 1");
}

Picos RefreshSchedule::next_start(Picos t) const {
    if (t <= interval_) return interval_;
    Picos k = (t + interval_ - 1) / interval_;
    return k * interval_;
}

bool RefreshSchedule::suppressed(Picos ref_start) const {
    return std::any_of(suppressed_.begin(), suppressed_.end(),
                       [&](const Interval& w) { return w.contains(ref_start); });
}

std::optional<Interval> RefreshSchedule::window_at(Picos t) const {
    if (t < interval_) return std::nullopt;
    Picos start = (t / interval_) * interval_;
    if (t >= start + t_rfc_ || suppressed(start)) return std::nullopt;
    return Interval{start, start + t_rfc_};
}

Picos admit_act(const BankTiming& bank, Picos requested, const RefreshSchedule& refresh, Picos t_rc) {
    Picos granted = requested;
    if (bank.last_act) granted = std::max(granted, *bank.last_act + t_rc);
    while (auto w = refresh.window_at(granted)) granted = w->end;
    return granted;
}

std::vector<Interval> refresh_events(const TimingParams& p, Picos horizon, const std::vector<Interval>& suppressed,
                                     double multiplier) {
    if (horizon < 0) throw Error(Errc::OutOfRange, "negative horizon");
    RefreshSchedule sched(p, multiplier, suppressed);
    std::vector<Interval> out;
    for (Picos t = sched.interval(); t <= horizon; t += sched.interval()) {
        if (!sched.suppressed(t)) out.push_back({t, t + p.t_rfc});
    }
    return out;
}

}  // namespace rhsim::timing
