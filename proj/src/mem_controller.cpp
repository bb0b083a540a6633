#include "rhsim/mem_controller.hpp"

#include <algorithm>

#include "rhsim/error.hpp"
#include "rhsim/hashing.hpp"
#include "rhsim/kvconfig.hpp"

namespace rhsim::mc {

void ControllerConfig::validate() const {
    if (!(refresh_multiplier >= 1.0 && refresh_multiplier <= kMaxRefreshMultiplier))
        throw Error(Errc::InvalidConfig, "refresh_multiplier must be within [1, 3.5]");
}

ControllerConfig ControllerConfig::from_config(const KvConfig& cfg) {
    ControllerConfig c;
    c.scrambling = cfg.get_or("controller.scrambling", "false") == "true";
    c.parity_enabled = cfg.get_or("controller.parity", "true") == "true";
    c.refresh_multiplier = cfg.get_double("controller.refresh_multiplier", c.refresh_multiplier);
    c.scramble_key = cfg.get_uint("controller.scramble_key", c.scramble_key);
    c.validate();
    return c;
}

std::array<std::uint32_t, 7> ControllerConfig::boot_mode_registers() const {
    // MR5[2:0] selects the CA parity latency; zero disables the check.
    return {0x0210, 0x0101, 0x0028, 0x0000, 0x0000, parity_enabled ? 0x0001u : 0x0000u, 0x0800};
}

std::uint64_t scramble(std::uint64_t word, std::uint64_t key, unsigned bank, std::uint32_t row, unsigned col) {
    return word ^ hash_key(key, {bank, row, col});
}

Controller::Controller(ControllerConfig cfg, timing::TimingParams timing, addr::MappingConfig map)
    : cfg_(cfg), timing_(timing), map_(std::move(map)), schedule_(timing, cfg.refresh_multiplier) {
    cfg_.validate();
    timing_.validate();
    map_.validate();
    next_ref_ = schedule_.interval();
}

bool Controller::any_open() const {
    return std::any_of(banks_.begin(), banks_.end(), [](const BankState& b) { return b.open_row.has_value(); });
}

void Controller::emit(std::vector<TimedCommand>& out, Picos t, const ddr::Command& cmd, std::uint64_t data) {
    bus_time_ = std::max(bus_time_, t);
    out.push_back({bus_time_, cmd, data});
}

void Controller::boot(Picos t, std::vector<TimedCommand>& out) {
    if (any_open()) {
        emit(out, t, ddr::Command::prea());
        for (auto& b : banks_) b.open_row.reset();
    }
    auto regs = cfg_.boot_mode_registers();
    for (std::uint8_t i = 0; i < regs.size(); ++i) emit(out, t, ddr::Command::mrs(i, regs[i]));
}

void Controller::refresh_until(Picos t, std::vector<TimedCommand>& out) {
    while (next_ref_ <= t) {
        if (any_open()) {
            emit(out, next_ref_, ddr::Command::prea());
            for (auto& b : banks_) b.open_row.reset();
        }
        emit(out, next_ref_, ddr::Command::ref());
        ++refs_issued_;
        next_ref_ += schedule_.interval();
    }
}

Picos Controller::submit(const cpu::MemoryRequest& req, std::vector<TimedCommand>& out, std::uint64_t data) {
    const auto la = addr::phys_to_logical(map_, addr::virt_to_phys(map_, req.virtual_addr));
    const unsigned b = la.bank.flat();
    Picos t = std::max(req.time, bus_time_);
    refresh_until(t, out);

    auto& bank = banks_[b];
    const bool hit = bank.open_row && *bank.open_row == la.row;
    if (!hit) {
        Picos g = timing::admit_act(bank.timing, t, schedule_, timing_.t_rc);
        while (g >= next_ref_) {
            refresh_until(g, out);
            g = timing::admit_act(bank.timing, g, schedule_, timing_.t_rc);
        }
        if (bank.open_row) emit(out, g, ddr::Command::pre(la.bank));
        emit(out, g, ddr::Command::act(la.bank, la.row));
        bank.open_row = la.row;
        bank.timing.last_act = g;
        t = g;
    }
    if (req.kind == cpu::RequestKind::Write) {
        std::uint64_t word = cfg_.scrambling ? scramble(data, cfg_.scramble_key, b, la.row, la.col) : data;
        emit(out, t, ddr::Command::wr(la.bank, la.col), word);
    } else {
        emit(out, t, ddr::Command::rd(la.bank, la.col));
    }
    return t;
}

void Controller::on_alert(Picos t, std::vector<TimedCommand>& out) {
    t = std::max(t, bus_time_);
    recalibrations_.push_back(t);
    boot(t, out);
}

std::uint64_t Controller::read_back(std::uint64_t raw, unsigned bank, std::uint32_t row, unsigned col) const {
    return cfg_.scrambling ? scramble(raw, cfg_.scramble_key, bank, row, col) : raw;
}

}  // namespace rhsim::mc
