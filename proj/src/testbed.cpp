#include "rhsim/testbed.hpp"

#include <algorithm>
#include <cmath>

#include "rhsim/error.hpp"

namespace rhsim::sim {

std::optional<Picos> Hart::next_time() {
    if (!pending) pending = stream.next();
    if (!pending) return std::nullopt;
    return pending->time + shift;
}

Testbed::Testbed(std::shared_ptr<const dram::DeviceProfile> profile, TestbedConfig cfg)
    : profile_(std::move(profile)),
      cfg_(std::move(cfg)),
      map_(cfg_.map ? *cfg_.map : addr::MappingConfig::default_for(profile_->rows_per_bank)),
      time_scale_(cfg_.time_scale.value_or(profile_->time_scale)),
      controller_(cfg_.controller, profile_->timing, map_),
      device_(profile_, cfg_.seed),
      analyzer_(cfg_.trigger, cfg_.capture) {
    if (!(time_scale_ >= 1.0)) throw Error(Errc::InvalidConfig, "time_scale must be >= 1");
}

void Testbed::boot(Picos t) {
    buf_.clear();
    controller_.boot(t, buf_);
    flush();
}

void Testbed::deliver(const mc::TimedCommand& tc) {
    const auto w = injector_.intercept(ddr::encode(tc.cmd), tc.t);
    const auto r = device_.apply(w, tc.t, tc.data);
    analyzer_.record(tc.t, tc.cmd, r.cmd);
    if (r.alert) {
        ++alerts_raised_;
        if (injector_.gate_alert(true)) {
            alerts_forwarded_.push_back(tc.t);
            std::vector<mc::TimedCommand> recal;
            controller_.on_alert(tc.t, recal);
            for (const auto& c : recal) deliver(c);
        }
    }
}

void Testbed::flush() {
    for (const auto& c : buf_) deliver(c);
    buf_.clear();
}

void Testbed::idle_until(Picos t) {
    buf_.clear();
    controller_.refresh_until(t, buf_);
    flush();
}

std::uint64_t Testbed::va_of(unsigned bank, std::uint32_t row, unsigned col) const {
    addr::LogicalAddr la;
    la.bank = ddr::BankId::from_flat(bank);
    la.row = row;
    la.col = static_cast<std::uint16_t>(col);
    return addr::phys_to_virt(map_, addr::logical_to_phys(map_, la));
}

Hart Testbed::make_hart(const cpu::SequenceProfile& profile, unsigned bank, std::uint32_t row_a, std::uint32_t row_b,
                        Picos start, Picos duration, std::uint64_t seed) {
    std::array<std::uint64_t, 2> va{va_of(bank, row_a), va_of(bank, row_b)};
    cpu::check_address_pair(map_, va);
    return Hart(cpu::RequestStream(profile, va, start, duration, seed), va);
}

void Testbed::submit(Hart& h) {
    auto req = *h.pending;
    h.pending.reset();
    const int slot = req.virtual_addr == h.va[0] ? 0 : 1;
    req.time += h.shift;
    buf_.clear();
    const Picos granted = controller_.submit(req, buf_, h.store_data[slot]);
    flush();
    if (granted > req.time) h.shift += granted - req.time;
    ++h.issued;
}

void Testbed::advance(Hart& hart, Picos until) {
    while (auto t = hart.next_time()) {
        if (*t >= until) break;
        submit(hart);
    }
    idle_until(until);
}

void Testbed::advance(std::vector<Hart*> harts, Picos until) {
    for (;;) {
        Hart* best = nullptr;
        Picos best_t = until;
        for (auto* h : harts) {
            auto t = h->next_time();
            if (t && *t < best_t) {
                best_t = *t;
                best = h;
            }
        }
        if (!best) break;
        submit(*best);
    }
    idle_until(until);
}

void Testbed::run(Hart& hart) {
    while (hart.next_time()) submit(hart);
}

dram::FlipReport Testbed::inspect() {
    const Picos gap = device_.longest_ref_gap(now());
    const auto scaled = static_cast<Picos>(std::llround(double(gap) * time_scale_));
    return device_.resolve_flips(scaled, cfg_.seed);
}

SequenceRun simulate_sequence(std::shared_ptr<const dram::DeviceProfile> profile, const cpu::SequenceProfile& seq,
                              unsigned bank, std::uint32_t row_a, std::uint32_t row_b, Picos duration,
                              std::uint64_t seed, const mc::ControllerConfig& controller) {
    TestbedConfig cfg;
    cfg.controller = controller;
    cfg.seed = seed;
    Testbed tb(std::move(profile), cfg);
    tb.boot(0);
    const Picos start = kPsPerUs;
    auto hart = tb.make_hart(seq, bank, row_a, row_b, start, duration, seed);
    tb.advance(hart, start + duration);
    SequenceRun run;
    run.trace = tb.analyzer().device_trace();
    run.requests = hart.issued;
    run.candidates = hart.stream.candidates();
    run.hits = hart.stream.hits();
    run.end = tb.now();
    return run;
}

}  // namespace rhsim::sim
