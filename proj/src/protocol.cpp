#include "rhsim/protocol.hpp"

#include <cmath>
#include <sstream>

#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/testbed.hpp"

namespace rhsim::inject {

std::uint32_t default_dummy(std::uint32_t aggressor, std::uint32_t rows_per_bank) {
    std::uint32_t d = (aggressor ^ (rows_per_bank / 2)) & ~ddr::kA14;
    if (d == aggressor || d >= rows_per_bank) throw Error(Errc::InvalidConfig, "no dummy row available");
    return d;
}

Scenario Scenario::from_config(const KvConfig& cfg) {
    Scenario s;
    auto profile = cfg.get_or("profile", "vendor1");
    s.profile = std::make_shared<const dram::DeviceProfile>(dram::DeviceProfile::named(profile));
    s.bank = static_cast<unsigned>(cfg.get_uint("bank", 0));
    s.aggressor = static_cast<std::uint32_t>(cfg.get_uint("aggressor", 0));
    if (auto d = cfg.get("dummy")) s.dummy = static_cast<std::uint32_t>(parse_uint(*d));
    s.sequence = cfg.get_or("sequence", s.sequence);
    s.arch = cpu::parse_arch(cfg.get_or("arch", "skylake"));
    s.victim_pattern = dram::parse_pattern(cfg.get_or("pattern", "all-1s"));
    if (auto a = cfg.get("aggressor_pattern")) s.aggressor_pattern = dram::parse_pattern(*a);
    if (auto t = cfg.get("time_scale")) s.time_scale = cfg.get_double("time_scale", 1.0);
    s.seed = cfg.get_uint("seed", 1);
    s.controller = mc::ControllerConfig::from_config(cfg);
    return s;
}

std::string InjectionReport::summary() const {
    std::ostringstream os;
    os << "aggressor " << to_hex(aggressor) << " (dummy " << to_hex(dummy) << ")\n";
    for (const auto& s : steps)
        os << "step " << s.number << " " << ProtocolScript::step_name(s.number) << ": " << format_duration(s.start)
           << " .. " << format_duration(s.end) << '\n';
    os << "hold (simulated): " << format_duration(hold_simulated) << '\n'
       << "hammer ACTs: " << hammer_acts << '\n'
       << "REFs during hold: device " << device_refs_during_hold << ", controller " << controller_refs_during_hold << '\n'
       << "controller alerts during steps 2-6: " << controller_alerts_steps_2_to_6 << '\n'
       << "device alerts suppressed: " << device_alerts_suppressed << '\n'
       << "recalibrations after step 7: " << recalibrations_after_step_7 << '\n'
       << "mode registers restored: " << (registers_restored() ? "yes" : "no") << '\n'
       << "flipped bits: " << flips.total() << " in " << flips.rows().size() << " rows\n";
    return os.str();
}

InjectionReport run_protocol(const ProtocolScript& script, const Scenario& sc) {
    script.validate();
    if (!sc.profile) throw Error(Errc::InvalidConfig, "scenario has no device profile");
    const auto& prof = *sc.profile;
    if (sc.aggressor >= prof.rows_per_bank) throw Error(Errc::OutOfRange, "aggressor " + to_hex(sc.aggressor));
    if (sc.aggressor & ddr::kA14)
        throw Error(Errc::Bit14Set, "aggressor " + to_hex(sc.aggressor) + " has row bit 14 set");
    const std::uint32_t dummy = sc.dummy.value_or(default_dummy(sc.aggressor, prof.rows_per_bank));
    if (dummy & ddr::kA14) throw Error(Errc::Bit14Set, "dummy row " + to_hex(dummy) + " has row bit 14 set");

    sim::TestbedConfig tc;
    tc.controller = sc.controller;
    tc.controller.parity_enabled = true;
    tc.seed = sc.seed;
    tc.capture = sc.capture;
    tc.time_scale = sc.time_scale;
    sim::Testbed tb(sc.profile, tc);
    const auto seq = cpu::Catalog::builtin().profile_for(sc.sequence, sc.arch);

    const std::uint64_t aggr_pattern = sc.aggressor_pattern.value_or(~sc.victim_pattern);
    tb.device().fill_bank(sc.bank, sc.victim_pattern);
    tb.device().write_row(sc.bank, sc.aggressor, aggr_pattern);
    tb.device().write_row(sc.bank, dummy, aggr_pattern);

    InjectionReport rep;
    rep.aggressor = sc.aggressor;
    rep.dummy = dummy;
    auto& inj = tb.injector();
    auto record = [&](int n, Picos a, Picos b) { rep.steps.push_back({n, a, b}); };

    // 1: boot, parity on (MR5), ECC off.
    tb.boot(0);
    for (unsigned i = 0; i < 7; ++i) rep.boot_snapshot[i] = tb.device().mode_register(i);
    record(1, 0, tb.now());

    // 2: cut ALERT_n.
    const Picos t2 = tb.now() + kPsPerUs;
    tb.idle_until(t2);
    inj.set_alert_suppressed(true, t2);
    record(2, t2, t2);

    // 3: start hammering; 4: hold A14 low for the (scaled) window.
    const Picos t3 = t2;
    const Picos t4 = t3 + script.duration_of(3);
    rep.hold_simulated = static_cast<Picos>(std::llround(double(script.duration_of(4)) / tb.time_scale()));
    const Picos t5 = t4 + rep.hold_simulated;
    auto hart = tb.make_hart(seq, sc.bank, sc.aggressor, dummy, t3, t5 - t3, sc.seed);
    hart.store_data = {aggr_pattern, aggr_pattern};
    const auto acts_before = tb.device().acts();
    tb.advance(hart, t4);
    record(3, t3, t4);

    const auto dev_refs = tb.device().refs_delivered();
    const auto ctl_refs = tb.controller().refs_issued();
    inj.press(t4);
    tb.advance(hart, t5);
    inj.release(t5);
    rep.device_refs_during_hold = tb.device().refs_delivered() - dev_refs;
    rep.controller_refs_during_hold = tb.controller().refs_issued() - ctl_refs;
    rep.hammer_acts = tb.device().acts() - acts_before;
    record(4, t4, t5);

    // 5: stop hammering; the remaining stream is dropped.
    const Picos t6 = t5 + script.duration_of(5);
    tb.idle_until(t6);
    record(5, t5, t6);

    // 6: reconnect ALERT_n.
    inj.set_alert_suppressed(false, t6);
    const Picos t7 = t6 + script.duration_of(6);
    tb.idle_until(t7);
    record(6, t6, t7);
    for (auto t : tb.alerts_forwarded())
        if (t >= t2 && t < t6) ++rep.controller_alerts_steps_2_to_6;
    rep.device_alerts_suppressed = tb.alerts_raised() - tb.alerts_forwarded().size();

    // 7: tap A14; the next REF turns into MRS, the alert reaches the
    // controller and it recalibrates.
    inj.tap(t7);
    const Picos t8 = t7 + script.duration_of(7);
    tb.idle_until(t8);
    record(7, t7, t8);
    for (auto t : tb.controller().recalibrations())
        if (t >= t7) ++rep.recalibrations_after_step_7;
    for (unsigned i = 0; i < 7; ++i) rep.final_registers[i] = tb.device().mode_register(i);

    // 8: inspect.
    rep.flips = tb.inspect();
    record(8, t8, t8);
    rep.injector_log = inj.log();
    return rep;
}

}  // namespace rhsim::inject
