#include "rhsim/fault_injector.hpp"

#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/timing.hpp"

namespace rhsim::inject {

void Injector::press(Picos t) {
    held_ = true;
    log_.push_back({t, "A14 held low"});
}

void Injector::release(Picos t) {
    held_ = false;
    log_.push_back({t, "A14 released"});
}

void Injector::set_alert_suppressed(bool on, Picos t) {
    suppressed_ = on;
    log_.push_back({t, on ? "ALERT_n suppressed" : "ALERT_n connected"});
}

void Injector::tap(Picos t) {
    tap_ = true;
    log_.push_back({t, "A14 tapped"});
}

ddr::SignalWord Injector::intercept(const ddr::SignalWord& w, Picos t) {
    if (w.cs_n || !w.we_a14()) return w;
    if (held_) {
        ++transformed_;
        return ddr::apply_a14_fault(w, true);
    }
    if (tap_) {
        tap_ = false;
        ++transformed_;
        log_.push_back({t, "tap transformed " + ddr::to_string(ddr::decode(w))});
        return ddr::apply_a14_fault(w, true);
    }
    return w;
}

ddr::SignalWord intercept(const ddr::SignalWord& w, const InjectorState& s) {
    return ddr::apply_a14_fault(w, s.a14_held_low);
}

bool gate_alert(bool device_alert, const InjectorState& s) { return device_alert && !s.alert_suppressed; }

namespace {

Picos standard_duration(int step, Picos hold, Picos lead) {
    constexpr Picos kSettle = 2 * 7'812'500;
    switch (step) {
        case 3: return lead;
        case 4: return hold;
        case 5:
        case 6:
        case 7: return kSettle;
        default: return 0;
    }
}

}  // namespace

ProtocolScript ProtocolScript::standard(Picos hold, Picos lead) {
    ProtocolScript s;
    for (int i = 1; i <= 8; ++i) s.steps.push_back({i, standard_duration(i, hold, lead)});
    return s;
}

ProtocolScript ProtocolScript::from_config(const KvConfig& cfg) {
    auto lines = cfg.all("step");
    if (lines.empty()) return standard();
    ProtocolScript s;
    for (const auto* e : lines) {
        auto parts = split_ws(e->value);
        if (parts.empty() || parts.size() > 2)
            throw Error(Errc::Parse, "line " + std::to_string(e->line) + ": expected 'step = <n> [duration]'");
        int n = static_cast<int>(parse_uint(parts[0]));
        Picos d = parts.size() == 2 ? parse_duration(parts[1], timing::TimingParams{}.t_refi) : standard_duration(n, 15 * kPsPerSec, 0);
        s.steps.push_back({n, d});
    }
    s.validate();
    return s;
}

void ProtocolScript::validate() const {
    if (steps.size() != 8) throw Error(Errc::ScriptOrder, "script must list steps 1 to 8, got " + std::to_string(steps.size()));
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].number != static_cast<int>(i) + 1)
            throw Error(Errc::ScriptOrder, "step " + std::to_string(steps[i].number) + " at position " + std::to_string(i + 1));
        if (steps[i].duration < 0) throw Error(Errc::ScriptOrder, "negative duration in step " + std::to_string(i + 1));
    }
}

Picos ProtocolScript::duration_of(int step) const {
    for (const auto& s : steps)
        if (s.number == step) return s.duration;
    throw Error(Errc::ScriptOrder, "no step " + std::to_string(step));
}

const char* ProtocolScript::step_name(int step) {
    static const char* kNames[] = {"?",
                                   "boot (parity on, ECC off)",
                                   "suppress ALERT_n",
                                   "start hammering",
                                   "hold A14 low",
                                   "stop hammering",
                                   "reconnect ALERT_n",
                                   "tap A14",
                                   "inspect flips"};
    return step >= 1 && step <= 8 ? kNames[step] : kNames[0];
}

}  // namespace rhsim::inject
