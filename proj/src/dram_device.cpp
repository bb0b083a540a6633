#include "rhsim/dram_device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rhsim/builtin_data.hpp"
#include "rhsim/error.hpp"
#include "rhsim/hashing.hpp"
#include "rhsim/kvconfig.hpp"

namespace rhsim::dram {

std::uint64_t parse_pattern(const std::string& name) {
    if (name == "all-1s" || name == "ones") return kAllOnes;
    if (name == "all-0s" || name == "zeros") return kAllZeros;
    if (name == "two-thirds" || name == "2/3") return kTwoThirdsOnes;
    if (name == "one-third" || name == "1/3") return kOneThirdOnes;
    return parse_uint(name);
}

// ---- DeviceProfile ---------------------------------------------------------

CellProbs DeviceProfile::cell_probs(std::uint32_t aggressor, std::uint32_t victim, adj::Kind kind) const {
    const int h = kind == adj::Kind::Whole ? 0 : 1;
    CellProbs c{p_max[h][1], p_max[h][0]};
    auto it = strength.find({aggressor, victim});
    if (it != strength.end()) {
        // Density counts the whole row; a half victim concentrates it in 32 bits.
        double p1 = std::min(1.0, it->second * (h ? 2.0 : 1.0));
        c.p0 = p_max[h][1] > 0 ? p1 * p_max[h][0] / p_max[h][1] : 0.0;
        c.p1 = p1;
    }
    return c;
}

void DeviceProfile::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (rows_per_bank == 0 || rows_per_bank > (1u << ddr::kAddrBits))
        throw Error(Errc::InvalidConfig, "rows_per_bank out of range");
    if (banks == 0 || banks > ddr::kBanks) throw Error(Errc::InvalidConfig, "banks must be 1..16");
    if (!topology || topology->rows() != rows_per_bank)
        throw Error(Errc::InvalidConfig, "adjacency must cover every row of the bank");
    for (const auto& kinds : p_max)
        for (double p : kinds)
            if (!prob(p)) throw Error(Errc::InvalidConfig, "p_max outside [0,1]");
    if (p_max[0][0] < p_max[1][0] || p_max[0][1] < p_max[1][1])
        throw Error(Errc::InvalidConfig, "p_max(whole) must not be below p_max(half)");
    if (!(n0 > 0)) throw Error(Errc::InvalidConfig, "n0 must be positive");
    if (!prob(retention_one) || !prob(retention_two) || retention_one + retention_two > 1.0)
        throw Error(Errc::InvalidConfig, "retention probabilities");
    if (!(time_scale >= 1.0)) throw Error(Errc::InvalidConfig, "time_scale must be >= 1");
    for (const auto& [k, d] : strength)
        if (!prob(d)) throw Error(Errc::InvalidConfig, "strength outside [0,1]");
    timing.validate();
}

DeviceProfile DeviceProfile::from_config(const KvConfig& cfg) {
    DeviceProfile p;
    p.vendor = cfg.get_or("vendor", "custom");
    p.description = cfg.get_or("description", "");
    p.rows_per_bank = static_cast<std::uint32_t>(cfg.get_uint("rows_per_bank", p.rows_per_bank));
    p.banks = static_cast<unsigned>(cfg.get_uint("banks", p.banks));
    p.n0 = cfg.get_double("n0", p.n0);
    p.p_max[0][1] = cfg.get_double("p_max.whole.1", p.p_max[0][1]);
    p.p_max[0][0] = cfg.get_double("p_max.whole.0", p.p_max[0][0]);
    p.p_max[1][1] = cfg.get_double("p_max.half.1", p.p_max[1][1]);
    p.p_max[1][0] = cfg.get_double("p_max.half.0", p.p_max[1][0]);
    p.retention_one = cfg.get_double("retention.one", p.retention_one);
    p.retention_two = cfg.get_double("retention.two", p.retention_two);
    if (auto v = cfg.get("retention.threshold")) p.retention_threshold = parse_duration(*v);
    p.time_scale = cfg.get_double("time_scale", p.time_scale);
    p.timing = timing::TimingParams::from_config(cfg);

    if (!cfg.all("adj").empty()) {
        if (cfg.get("layout.low") || cfg.get("layout.high"))
            throw Error(Errc::InvalidConfig, "profile gives both adj entries and a layout");
        p.topology = std::make_shared<adj::MapTopology>(adj::AdjacencyMap::from_config(cfg), p.rows_per_bank);
    } else {
        p.topology = adj::layout_from_config(cfg, p.rows_per_bank);
    }
    for (const auto* e : cfg.all("strength")) {
        auto parts = split_ws(e->value);
        if (parts.size() != 3)
            throw Error(Errc::Parse, "line " + std::to_string(e->line) + ": expected 'strength = <aggr> <victim> <density>'");
        double d = 0;
        try {
            d = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw Error(Errc::Parse, "line " + std::to_string(e->line) + ": bad density");
        }
        p.strength[{static_cast<std::uint32_t>(parse_uint(parts[0])), static_cast<std::uint32_t>(parse_uint(parts[1]))}] = d;
    }
    p.validate();
    return p;
}

DeviceProfile DeviceProfile::load(const std::string& path) { return from_config(KvConfig::load(path)); }

DeviceProfile DeviceProfile::builtin(const std::string& name) {
    auto text = builtin_file("profiles/" + name + ".cfg");
    if (text.empty()) throw Error(Errc::InvalidConfig, "no built-in profile '" + name + "'");
    return from_config(KvConfig::parse(text));
}

std::vector<std::string> DeviceProfile::builtin_names() { return {"vendor1", "vendor2", "vendor3"}; }

DeviceProfile DeviceProfile::synthetic(std::uint64_t seed, const adj::SyntheticOptions& opt) {
    DeviceProfile p;
    p.vendor = "synthetic";
    p.description = "generated layout, seed " + std::to_string(seed);
    auto layout = adj::generate_synthetic_layout(seed, opt);
    p.rows_per_bank = layout->rows();
    p.topology = std::move(layout);
    p.n0 = 2000;
    p.time_scale = 50000;
    p.validate();
    return p;
}

DeviceProfile DeviceProfile::named(const std::string& spec) {
    static const std::string kSynth = "synthetic:";
    if (spec.rfind(kSynth, 0) == 0) return synthetic(parse_uint(spec.substr(kSynth.size())));
    if (spec.find('/') != std::string::npos || spec.find(".cfg") != std::string::npos) return load(spec);
    return builtin(spec);
}

// ---- FlipReport --------------------------------------------------------------

void FlipReport::merge(const FlipReport& other) {
    for (const auto& [k, fl] : other.rows_) {
        auto& dst = rows_[k];
        dst.insert(dst.end(), fl.begin(), fl.end());
    }
}

const std::vector<FlipReport::Flip>* FlipReport::flips(unsigned bank, std::uint32_t row) const {
    auto it = rows_.find({bank, row});
    return it == rows_.end() ? nullptr : &it->second;
}

std::size_t FlipReport::total(unsigned bank, std::uint32_t row) const {
    auto* f = flips(bank, row);
    return f ? f->size() : 0;
}

std::size_t FlipReport::total() const {
    std::size_t n = 0;
    for (const auto& [k, f] : rows_) n += f.size();
    return n;
}

std::size_t FlipReport::count_direction(unsigned bank, std::uint32_t row, bool to_one) const {
    auto* f = flips(bank, row);
    if (!f) return 0;
    return static_cast<std::size_t>(std::count_if(f->begin(), f->end(), [&](const Flip& x) { return x.to_one == to_one; }));
}

std::vector<std::uint32_t> FlipReport::per_word(unsigned bank, std::uint32_t row) const {
    std::vector<std::uint32_t> out(kWordsPerRow, 0);
    if (auto* f = flips(bank, row))
        for (const auto& x : *f) ++out[x.word];
    return out;
}

std::vector<std::uint32_t> FlipReport::per_bit(unsigned bank, std::uint32_t row) const {
    std::vector<std::uint32_t> out(64, 0);
    if (auto* f = flips(bank, row))
        for (const auto& x : *f) ++out[x.bit];
    return out;
}

FlipReport FlipReport::restrict(unsigned bank, std::uint32_t first, std::uint32_t last) const {
    FlipReport r;
    for (auto it = rows_.lower_bound({bank, first}); it != rows_.end() && it->first < Key{bank, last}; ++it)
        r.rows_.insert(*it);
    return r;
}

std::string FlipReport::to_csv() const {
    std::ostringstream os;
    os << "bank,row,word,bit,direction\n";
    for (const auto& [k, fl] : rows_)
        for (const auto& f : fl)
            os << k.first << ',' << to_hex(k.second) << ',' << f.word << ',' << int(f.bit) << ','
               << (f.to_one ? "0to1" : "1to0") << '\n';
    return os.str();
}

FlipReport FlipReport::from_csv(const std::string& text) {
    FlipReport r;
    std::istringstream is(text);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (n == 1) {
            if (line != "bank,row,word,bit,direction") throw Error(Errc::Parse, "line 1: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5 || (f[4] != "1to0" && f[4] != "0to1"))
            throw Error(Errc::Parse, "line " + std::to_string(n) + ": malformed flip record");
        try {
            auto word = parse_uint(f[2]);
            auto bit = parse_uint(f[3]);
            if (word >= kWordsPerRow || bit >= 64) throw Error(Errc::Parse, "range");
            r.add(static_cast<unsigned>(parse_uint(f[0])), static_cast<std::uint32_t>(parse_uint(f[1])),
                  Flip{static_cast<std::uint16_t>(word), static_cast<std::uint8_t>(bit), f[4] == "0to1"});
        } catch (const Error&) {
            throw Error(Errc::Parse, "line " + std::to_string(n) + ": malformed flip record");
        }
    }
    return r;
}

// ---- Device -------------------------------------------------------------------

Device::Device(std::shared_ptr<const DeviceProfile> profile, std::uint64_t seed)
    : profile_(std::move(profile)), seed_(seed) {
    profile_->validate();
    open_.assign(ddr::kBanks, std::nullopt);
    banks_.resize(ddr::kBanks);
}

void Device::check_row(std::uint32_t row) const {
    if (row >= profile_->rows_per_bank) throw Error(Errc::OutOfRange, "row " + to_hex(row) + " beyond bank");
}

ApplyResult Device::apply(const ddr::SignalWord& w, Picos t, std::uint64_t wr_data) {
    ApplyResult r;
    r.cmd = ddr::decode(w);
    if (r.cmd.kind == ddr::CommandKind::Des) return r;
    r.alert = parity_enabled() && ddr::check_parity(w) == ddr::ParityResult::Fail;
    r.data = execute(r.cmd, t, wr_data);
    return r;
}

const std::vector<Device::VictimHalf>& Device::victims_of(std::uint32_t aggressor) {
    auto it = victim_cache_.find(aggressor);
    if (it != victim_cache_.end()) return it->second;
    if (victim_cache_.size() > 4096) victim_cache_.clear();
    std::vector<VictimHalf> v;
    for (const auto& n : profile_->topology->neighbors(aggressor)) {
        auto probs = profile_->cell_probs(aggressor, n.row, n.kind);
        for (std::uint8_t h = 0; h < 2; ++h)
            if (adj::kind_covers(n.kind, h))
                v.push_back({n.row, h, static_cast<float>(probs.p1), static_cast<float>(probs.p0)});
    }
    return victim_cache_.emplace(aggressor, std::move(v)).first->second;
}

void Device::on_ref(Picos t) {
    for (auto [bank, idx] : dirty_) {
        auto& c = banks_[bank].counters[idx];
        c.peak = std::max(c.peak, c.count);
        c.count = 0;
    }
    longest_gap_ = std::max(longest_gap_, t - last_ref_);
    last_ref_ = t;
    ++refs_;
}

std::uint64_t Device::execute(const ddr::Command& cmd, Picos t, std::uint64_t wr_data) {
    using ddr::CommandKind;
    const unsigned bank = cmd.bank.flat();
    auto any_open = [&] {
        return std::any_of(open_.begin(), open_.end(), [](const auto& o) { return o.has_value(); });
    };
    switch (cmd.kind) {
        case CommandKind::Des:
            return 0;
        case CommandKind::Act: {
            check_row(cmd.row);
            if (open_[bank]) throw Error(Errc::ProtocolViolation, "ACT to bank " + std::to_string(bank) + " with a row open");
            open_[bank] = cmd.row;
            ++acts_;
            auto& b = banks_[bank];
            if (b.counters.empty()) b.counters.resize(std::size_t{profile_->rows_per_bank} * 2);
            for (const auto& v : victims_of(cmd.row)) {
                auto idx = std::size_t{v.row} * 2 + v.half;
                auto& c = b.counters[idx];
                ++c.count;
                c.p1 = std::max(c.p1, v.p1);
                c.p0 = std::max(c.p0, v.p0);
                if (!c.dirty) {
                    c.dirty = true;
                    dirty_.emplace_back(bank, static_cast<std::uint32_t>(idx));
                }
            }
            return 0;
        }
        case CommandKind::Rd:
        case CommandKind::Wr: {
            if (!open_[bank])
                throw Error(Errc::ProtocolViolation, std::string(ddr::mnemonic(cmd.kind)) + " to closed bank " + std::to_string(bank));
            const auto row = *open_[bank];
            std::uint64_t out = 0;
            if (cmd.kind == CommandKind::Rd) out = word_of(banks_[bank], row, cmd.col);
            else set_word(banks_[bank], row, cmd.col, wr_data);
            if (cmd.auto_precharge) open_[bank].reset();
            return out;
        }
        case CommandKind::Pre:
            open_[bank].reset();
            return 0;
        case CommandKind::Prea:
            for (auto& o : open_) o.reset();
            return 0;
        case CommandKind::Ref:
            if (any_open()) throw Error(Errc::ProtocolViolation, "REF with a bank open");
            on_ref(t);
            return 0;
        case CommandKind::Mrs:
            if (any_open()) throw Error(Errc::ProtocolViolation, "MRS with a bank open");
            mode_regs_.at(cmd.mode_register) = cmd.payload;
            return 0;
    }
    return 0;
}

std::uint64_t Device::word_of(const Bank& b, std::uint32_t row, unsigned word) const {
    auto it = b.rows.find(row);
    if (it == b.rows.end()) return b.pattern;
    const Row& r = it->second;
    if (!r.full.empty()) return r.full[word];
    std::uint64_t v = b.pattern;
    for (const auto& [w, x] : r.xors)
        if (w == word) v ^= x;
    return v;
}

void Device::set_word(Bank& b, std::uint32_t row, unsigned word, std::uint64_t value) {
    auto& r = b.rows[row];
    if (r.full.empty()) {
        r.full.assign(kWordsPerRow, b.pattern);
        for (const auto& [w, x] : r.xors) r.full[w] ^= x;
        r.xors.clear();
    }
    r.full[word] = value;
}

void Device::flip_bit(Bank& b, std::uint32_t row, unsigned word, unsigned bit) {
    auto& r = b.rows[row];
    const std::uint64_t mask = std::uint64_t{1} << bit;
    if (!r.full.empty()) {
        r.full[word] ^= mask;
        return;
    }
    for (auto& [w, x] : r.xors) {
        if (w == word) {
            x ^= mask;
            return;
        }
    }
    if (r.xors.size() < 32) {
        r.xors.emplace_back(static_cast<std::uint16_t>(word), mask);
        return;
    }
    r.full.assign(kWordsPerRow, b.pattern);
    for (const auto& [w, x] : r.xors) r.full[w] ^= x;
    r.xors.clear();
    r.full[word] ^= mask;
}

void Device::fill_bank(unsigned bank, std::uint64_t pattern) {
    auto& b = banks_.at(bank);
    b.pattern = pattern;
    b.rows.clear();
}

void Device::fill_all(std::uint64_t pattern) {
    for (unsigned b = 0; b < banks_.size(); ++b) fill_bank(b, pattern);
}

void Device::write_row(unsigned bank, std::uint32_t row, const std::vector<std::uint64_t>& data) {
    check_row(row);
    if (data.size() != kWordsPerRow) throw Error(Errc::OutOfRange, "row data must hold 1024 words");
    banks_.at(bank).rows[row] = Row{data, {}};
}

void Device::write_row(unsigned bank, std::uint32_t row, std::uint64_t pattern) {
    check_row(row);
    auto& b = banks_.at(bank);
    if (pattern == b.pattern) b.rows.erase(row);
    else b.rows[row] = Row{std::vector<std::uint64_t>(kWordsPerRow, pattern), {}};
}

std::vector<std::uint64_t> Device::read_row(unsigned bank, std::uint32_t row) const {
    check_row(row);
    std::vector<std::uint64_t> out(kWordsPerRow);
    const auto& b = banks_.at(bank);
    for (unsigned w = 0; w < kWordsPerRow; ++w) out[w] = word_of(b, row, w);
    return out;
}

std::uint64_t Device::read_word(unsigned bank, std::uint32_t row, unsigned word) const {
    check_row(row);
    if (word >= kWordsPerRow) throw Error(Errc::OutOfRange, "word " + std::to_string(word));
    return word_of(banks_.at(bank), row, word);
}

std::uint32_t Device::disturbance(unsigned bank, std::uint32_t row, int half) const {
    check_row(row);
    const auto& c = banks_.at(bank).counters;
    return c.empty() ? 0 : c[std::size_t{row} * 2 + half].count;
}

std::uint32_t Device::disturbance_peak(unsigned bank, std::uint32_t row, int half) const {
    check_row(row);
    const auto& c = banks_.at(bank).counters;
    return c.empty() ? 0 : c[std::size_t{row} * 2 + half].peak;
}

int Device::weak_cells(unsigned bank, std::uint32_t row) const {
    double u = to_unit(hash_key(seed_, {bank, row, 0x5245u}));
    if (u < profile_->retention_two) return 2;
    if (u < profile_->retention_two + profile_->retention_one) return 1;
    return 0;
}

Picos Device::longest_ref_gap(Picos now) const { return std::max(longest_gap_, now - last_ref_); }

FlipReport Device::resolve_flips(Picos elapsed_without_refresh, std::uint64_t rng_seed) {
    FlipReport report;
    const double n0 = profile_->n0;
    for (auto [bank, idx] : dirty_) {
        auto& b = banks_[bank];
        auto& c = b.counters[idx];
        const std::uint32_t n = std::max(c.peak, c.count);
        const std::uint32_t row = idx / 2;
        const unsigned half = idx % 2;
        const double sat = 1.0 - std::exp(-double(n) / n0);
        const double q1 = c.p1 * sat, q0 = c.p0 * sat;
        c = Counter{};
        if (n == 0 || (q1 <= 0 && q0 <= 0)) continue;
        const std::uint64_t base = hash_key(rng_seed, {bank, row, half});
        for (unsigned w = 0; w < kWordsPerRow; ++w) {
            const std::uint64_t v = word_of(b, row, w);
            for (unsigned i = 0; i < 32; ++i) {
                const unsigned bit = half * 32 + i;
                const bool one = (v >> bit) & 1u;
                const double u = to_unit(splitmix64(base + w * 32u + i));
                if (u < (one ? q1 : q0)) {
                    flip_bit(b, row, w, bit);
                    report.add(bank, row, {static_cast<std::uint16_t>(w), static_cast<std::uint8_t>(bit), !one});
                }
            }
        }
    }
    dirty_.clear();

    if (elapsed_without_refresh >= profile_->retention_threshold) {
        for (unsigned bank = 0; bank < profile_->banks; ++bank) {
            auto& b = banks_[bank];
            for (std::uint32_t row = 0; row < profile_->rows_per_bank; ++row) {
                const int weak = weak_cells(bank, row);
                unsigned prev = ~0u;
                for (int i = 0; i < weak; ++i) {
                    auto h = hash_key(seed_, {bank, row, 0x5245u, static_cast<std::uint64_t>(i) + 1});
                    unsigned cell = static_cast<unsigned>(h % kBitsPerRow);
                    if (cell == prev) cell = (cell + 1) % kBitsPerRow;
                    prev = cell;
                    const unsigned w = cell / 64, bit = cell % 64;
                    if ((word_of(b, row, w) >> bit) & 1u) {
                        flip_bit(b, row, w, bit);
                        report.add(bank, row, {static_cast<std::uint16_t>(w), static_cast<std::uint8_t>(bit), false});
                    }
                }
            }
        }
    }
    longest_gap_ = 0;
    return report;
}

}  // namespace rhsim::dram
