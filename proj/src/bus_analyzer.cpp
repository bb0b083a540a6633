#include "rhsim/bus_analyzer.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"

namespace rhsim::bus {

using ddr::Command;
using ddr::CommandKind;

namespace {

std::optional<CommandKind> parse_kind(const std::string& s) {
    for (auto k : {CommandKind::Des, CommandKind::Mrs, CommandKind::Ref, CommandKind::Pre, CommandKind::Prea,
                   CommandKind::Act, CommandKind::Wr, CommandKind::Rd})
        if (s == ddr::mnemonic(k)) return k;
    return std::nullopt;
}

bool has_bank(CommandKind k) {
    return k == CommandKind::Act || k == CommandKind::Rd || k == CommandKind::Wr || k == CommandKind::Pre;
}

}  // namespace

bool Trigger::matches(const Command& c) const {
    if (kind && c.kind != *kind) return false;
    if (bank && (!has_bank(c.kind) || c.bank.flat() != *bank)) return false;
    if (row && (c.kind != CommandKind::Act || c.row != *row)) return false;
    return true;
}

Trigger Trigger::parse(const std::string& text) {
    Trigger t;
    if (text.empty() || text == "any") return t;
    std::stringstream ss(text);
    std::string part;
    bool first = true;
    while (std::getline(ss, part, ':')) {
        if (first) {
            first = false;
            if (part != "any") {
                t.kind = parse_kind(part);
                if (!t.kind) throw Error(Errc::Parse, "unknown trigger command '" + part + "'");
            }
            continue;
        }
        auto eq = part.find('=');
        if (eq == std::string::npos) throw Error(Errc::Parse, "bad trigger field '" + part + "'");
        auto key = part.substr(0, eq);
        auto val = parse_uint(part.substr(eq + 1));
        if (key == "bank") t.bank = static_cast<unsigned>(val);
        else if (key == "row") t.row = static_cast<std::uint32_t>(val);
        else throw Error(Errc::Parse, "bad trigger field '" + key + "'");
    }
    return t;
}

Trace capture(const Trace& stream, const Trigger& trigger) {
    auto it = std::find_if(stream.begin(), stream.end(), [&](const TraceRecord& r) { return trigger.matches(r.cmd); });
    return Trace(it, stream.end());
}

void BusAnalyzer::clear() {
    device_.clear();
    controller_.clear();
    armed_ = false;
}

void BusAnalyzer::record(Picos t, const Command& controller_side, const Command& device_side) {
    if (!enabled_) return;
    if (!armed_) {
        if (!trigger_.matches(device_side)) return;
        armed_ = true;
    }
    device_.push_back({t, device_side});
    controller_.push_back({t, controller_side});
}

std::vector<long> acts_per_trefi(const Trace& trace) {
    std::vector<long> out;
    bool started = false;
    long count = 0;
    for (const auto& r : trace) {
        if (r.cmd.kind == CommandKind::Ref) {
            if (started) out.push_back(count);
            started = true;
            count = 0;
        } else if (r.cmd.kind == CommandKind::Act) {
            ++count;
        }
    }
    if (out.empty()) throw Error(Errc::InsufficientRefs, "trace holds fewer than two REF commands");
    return out;
}

Picos LatencyDistribution::percentile(double q) const {
    if (deltas.empty()) throw Error(Errc::InsufficientActs, "empty latency distribution");
    q = std::clamp(q, 0.0, 100.0);
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * double(deltas.size())));
    return deltas[rank == 0 ? 0 : rank - 1];
}

double LatencyDistribution::mean() const {
    if (deltas.empty()) return 0;
    return std::accumulate(deltas.begin(), deltas.end(), 0.0) / double(deltas.size());
}

double LatencyDistribution::fraction_in(Picos lo, Picos hi) const {
    if (deltas.empty()) return 0;
    auto a = std::lower_bound(deltas.begin(), deltas.end(), lo);
    auto b = std::upper_bound(deltas.begin(), deltas.end(), hi);
    return double(b - a) / double(deltas.size());
}

double LatencyDistribution::fraction_within(Picos center, Picos tolerance) const {
    return fraction_in(center - tolerance, center + tolerance);
}

Picos LatencyDistribution::mode(Picos bin) const {
    if (deltas.empty()) throw Error(Errc::InsufficientActs, "empty latency distribution");
    std::map<Picos, std::size_t> hist;
    for (auto d : deltas) ++hist[d / bin];
    auto best = std::max_element(hist.begin(), hist.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    // Median of the modal bin's members.
    auto lo = std::lower_bound(deltas.begin(), deltas.end(), best->first * bin);
    return *(lo + static_cast<std::ptrdiff_t>(best->second / 2));
}

LatencyDistribution act_latency_cdf(const Trace& trace, const LatencyOptions& opt) {
    LatencyDistribution d;
    std::optional<Picos> last;
    bool ref_between = false;
    std::size_t acts = 0;
    for (const auto& r : trace) {
        if (r.cmd.kind == CommandKind::Ref) {
            ref_between = true;
        } else if (r.cmd.kind == CommandKind::Act) {
            ++acts;
            if (last) {
                Picos delta = r.t - *last;
                if (ref_between && opt.exclude_refresh_straddle) d.refresh_straddles.push_back(delta);
                else d.deltas.push_back(delta);
            }
            last = r.t;
            ref_between = false;
        }
    }
    if (acts < 2 || d.deltas.empty()) throw Error(Errc::InsufficientActs, "trace holds fewer than two ACT commands");
    std::sort(d.deltas.begin(), d.deltas.end());
    std::sort(d.refresh_straddles.begin(), d.refresh_straddles.end());
    return d;
}

Summary summarize(std::vector<double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto pct = [&](double q) {
        auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * double(values.size())));
        return values[rank == 0 ? 0 : rank - 1];
    };
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    s.p50 = pct(50);
    s.p90 = pct(90);
    s.p99 = pct(99);
    s.min = values.front();
    s.max = values.back();
    return s;
}

// ---- CSV ------------------------------------------------------------------------

namespace {

constexpr const char* kHeader = "t_ps,cmd,bg,ba,row,col";

std::string cmd_name(const Command& c) {
    if (c.auto_precharge && c.kind == CommandKind::Rd) return "RDA";
    if (c.auto_precharge && c.kind == CommandKind::Wr) return "WRA";
    return ddr::mnemonic(c.kind);
}

}  // namespace

std::string export_csv(const Trace& trace) {
    std::ostringstream os;
    os << kHeader << '\n';
    for (const auto& r : trace) {
        const auto& c = r.cmd;
        unsigned bg = c.bank.group, ba = c.bank.bank;
        std::uint32_t row = c.row, col = c.col;
        if (c.kind == CommandKind::Mrs) {
            bg = (c.mode_register >> 2) & 1u;
            ba = c.mode_register & 3u;
            row = c.payload;
        }
        os << r.t << ',' << cmd_name(c) << ',' << bg << ',' << ba << ',' << to_hex(row) << ',' << to_hex(col) << '\n';
    }
    return os.str();
}

Trace import_csv(const std::string& text) {
    Trace out;
    std::istringstream is(text);
    std::string line;
    int n = 0;
    auto fail = [&](const std::string& why) { throw Error(Errc::Parse, "line " + std::to_string(n) + ": " + why); };
    while (std::getline(is, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (n == 1) {
            if (line != kHeader) fail("expected header '" + std::string(kHeader) + "'");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 6) fail("expected 6 fields");
        TraceRecord r;
        std::uint64_t bg = 0, ba = 0, row = 0, col = 0;
        try {
            auto ts = trim(f[0]);
            if (ts.empty() || ts.front() == '-') fail("bad timestamp");
            r.t = static_cast<Picos>(parse_uint(ts));
            bg = parse_uint(f[2]);
            ba = parse_uint(f[3]);
            row = parse_uint(f[4]);
            col = parse_uint(f[5]);
        } catch (const Error& e) {
            if (std::string(e.what()).rfind("ParseError: line", 0) == 0) throw;
            fail(e.what());
        }
        if (bg > 3 || ba > 3) fail("bank group/bank out of range");
        std::string name = f[1];
        bool ap = false;
        if (name == "RDA" || name == "WRA") {
            ap = true;
            name.pop_back();
        }
        auto kind = parse_kind(name);
        if (!kind) fail("unknown command '" + f[1] + "'");
        ddr::BankId bank{static_cast<std::uint8_t>(bg), static_cast<std::uint8_t>(ba)};
        switch (*kind) {
            case CommandKind::Act:
                if (row > ddr::kAddrMask) fail("row out of range");
                r.cmd = Command::act(bank, static_cast<std::uint32_t>(row));
                break;
            case CommandKind::Rd:
            case CommandKind::Wr:
                if (col >= ddr::kColumns) fail("column out of range");
                r.cmd = *kind == CommandKind::Rd ? Command::rd(bank, static_cast<std::uint16_t>(col), ap)
                                                 : Command::wr(bank, static_cast<std::uint16_t>(col), ap);
                break;
            case CommandKind::Pre:
                r.cmd = Command::pre(bank);
                break;
            case CommandKind::Mrs:
                if (row > ddr::kAddrMask) fail("payload out of range");
                r.cmd = Command::mrs(static_cast<std::uint8_t>(((bg & 1u) << 2) | ba), static_cast<std::uint32_t>(row));
                break;
            case CommandKind::Prea: r.cmd = Command::prea(); break;
            case CommandKind::Ref: r.cmd = Command::ref(); break;
            case CommandKind::Des: r.cmd = Command::des(); break;
        }
        if (!out.empty() && r.t < out.back().t) fail("records out of time order");
        out.push_back(r);
    }
    if (n == 0) throw Error(Errc::Parse, "line 1: empty file");
    return out;
}

std::string rate_csv(const std::vector<long>& acts) {
    std::ostringstream os;
    os << "window,acts\n";
    for (std::size_t i = 0; i < acts.size(); ++i) os << i << ',' << acts[i] << '\n';
    return os.str();
}

std::string cdf_csv(const LatencyDistribution& d) {
    std::ostringstream os;
    os << "delta_ps,cdf\n";
    const double n = double(d.deltas.size());
    for (std::size_t i = 0; i < d.deltas.size(); ++i) {
        if (i + 1 < d.deltas.size() && d.deltas[i + 1] == d.deltas[i]) continue;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", double(i + 1) / n);
        os << d.deltas[i] << ',' << buf << '\n';
    }
    return os.str();
}

}  // namespace rhsim::bus
