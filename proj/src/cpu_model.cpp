#include "rhsim/cpu_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rhsim/builtin_data.hpp"
#include "rhsim/error.hpp"
#include "rhsim/hashing.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/timing.hpp"

namespace rhsim::cpu {

const char* arch_name(Arch a) {
    switch (a) {
        case Arch::Broadwell: return "broadwell";
        case Arch::Skylake: return "skylake";
        case Arch::Cascadelake: return "cascadelake";
    }
    return "?";
}

Arch parse_arch(const std::string& s) {
    for (auto a : {Arch::Broadwell, Arch::Skylake, Arch::Cascadelake})
        if (s == arch_name(a)) return a;
    throw Error(Errc::UnsupportedArch, "unknown architecture '" + s + "'");
}

namespace {

struct OpInfo {
    Op op;
    const char* name;
    bool memory;
    bool fence;
};

constexpr OpInfo kOps[] = {
    {Op::Load, "load", true, false},
    {Op::Store, "store", true, false},
    {Op::Clflush, "clflush", true, false},
    {Op::Clflushopt, "clflushopt", true, false},
    {Op::Mfence, "mfence", false, true},
    {Op::Lfence, "lfence", false, true},
    {Op::Sfence, "sfence", false, true},
    {Op::NtLoad, "nt_load", true, false},
    {Op::NtStore, "nt_store", true, false},
    {Op::UncachedLoad, "uncached_load", true, false},
    {Op::Invd, "invd", false, false},
    {Op::Wbinvd, "wbinvd", false, false},
    {Op::CacheConflictEvict, "cache_conflict_evict", true, false},
};

const OpInfo& info(Op op) { return kOps[static_cast<int>(op)]; }

}  // namespace

const char* op_name(Op op) { return info(op).name; }
bool op_is_memory(Op op) { return info(op).memory; }
bool op_is_fence(Op op) { return info(op).fence; }

bool InstructionSequence::has_fence() const {
    return std::any_of(body.begin(), body.end(), [](const SeqOp& o) { return op_is_fence(o.op); });
}

void InstructionSequence::validate() const {
    if (body.empty()) throw Error(Errc::InvalidConfig, "sequence '" + name + "' has an empty body");
    for (const auto& o : body) {
        if (op_is_memory(o.op) && (o.slot < 0 || o.slot >= static_cast<int>(slots.size())))
            throw Error(Errc::InvalidConfig, "sequence '" + name + "': " + op_name(o.op) + " needs a declared address slot");
        if (!op_is_memory(o.op) && o.slot >= 0)
            throw Error(Errc::InvalidConfig, "sequence '" + name + "': " + op_name(o.op) + " takes no address");
    }
}

InstructionSequence InstructionSequence::parse(const std::string& name, const std::string& body) {
    InstructionSequence s;
    s.name = name;
    std::stringstream ss(body);
    std::string stmt;
    while (std::getline(ss, stmt, ';')) {
        auto parts = split_ws(stmt);
        if (parts.empty()) continue;
        SeqOp op;
        bool found = false;
        for (const auto& i : kOps) {
            if (parts[0] == i.name) {
                op.op = i.op;
                found = true;
            }
        }
        if (!found) throw Error(Errc::Parse, "sequence '" + name + "': unknown op '" + parts[0] + "'");
        if (parts.size() > 2) throw Error(Errc::Parse, "sequence '" + name + "': too many operands in '" + stmt + "'");
        if (parts.size() == 2) {
            auto it = std::find(s.slots.begin(), s.slots.end(), parts[1]);
            op.slot = static_cast<int>(it - s.slots.begin());
            if (it == s.slots.end()) s.slots.push_back(parts[1]);
        }
        s.body.push_back(op);
    }
    s.validate();
    return s;
}

std::string InstructionSequence::to_string() const {
    std::string out;
    for (const auto& o : body) {
        if (!out.empty()) out += "; ";
        out += op_name(o.op);
        if (o.slot >= 0) out += " " + slots[o.slot];
    }
    return out;
}

const char* request_kind_name(RequestKind k) {
    switch (k) {
        case RequestKind::Read: return "read";
        case RequestKind::Write: return "write";
        case RequestKind::FlushRead: return "flush-read";
    }
    return "?";
}

RequestKind parse_request_kind(const std::string& s) {
    for (auto k : {RequestKind::Read, RequestKind::Write, RequestKind::FlushRead})
        if (s == request_kind_name(k)) return k;
    throw Error(Errc::Parse, "unknown request kind '" + s + "'");
}

Picos SequenceProfile::iteration_period() const {
    return std::accumulate(intra_iteration_gaps.begin(), intra_iteration_gaps.end(), Picos{0}) + inter_iteration_gap;
}

void SequenceProfile::validate() const {
    if (!(cache_hit_fraction >= 0.0 && cache_hit_fraction <= 1.0))
        throw Error(Errc::InvalidConfig, name + ": cache_hit_fraction outside [0,1]");
    for (auto g : intra_iteration_gaps)
        if (g < 0) throw Error(Errc::InvalidConfig, name + ": negative gap");
    if (inter_iteration_gap < 0) throw Error(Errc::InvalidConfig, name + ": negative gap");
    if (iteration_period() <= 0) throw Error(Errc::InvalidConfig, name + ": iteration period must be positive");
    if (warmup_iterations < 0) throw Error(Errc::InvalidConfig, name + ": negative warmup");
}

// ---- Catalog ----------------------------------------------------------------

Catalog Catalog::parse(const std::string& text) {
    Catalog c;
    auto cfg = KvConfig::parse(text);
    for (const auto& e : cfg.entries()) {
        if (e.section.empty())
            throw Error(Errc::Parse, "line " + std::to_string(e.line) + ": key outside a sequence section");
        if (!c.sections_.count(e.section)) c.order_.push_back(e.section);
        c.sections_[e.section][e.key] = e.value;
    }
    // Every entry must build for each listed architecture.
    for (const auto& name : c.order_)
        for (auto a : c.archs(name)) (void)c.profile_for(name, a);
    return c;
}

Catalog Catalog::load(const std::string& path) { return parse(read_file(path)); }

const Catalog& Catalog::builtin() {
    static const Catalog c = parse(std::string(builtin_file("sequences.cfg")));
    return c;
}

std::vector<std::string> Catalog::names() const { return order_; }

std::vector<Arch> Catalog::archs(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw Error(Errc::UnknownSequence, "unknown sequence '" + name + "'");
    auto a = it->second.find("archs");
    std::vector<Arch> out;
    if (a == it->second.end()) return {Arch::Broadwell, Arch::Skylake, Arch::Cascadelake};
    for (const auto& s : split_ws(a->second)) out.push_back(parse_arch(s));
    return out;
}

SequenceProfile Catalog::profile_for(const std::string& name, Arch arch) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw Error(Errc::UnknownSequence, "unknown sequence '" + name + "'");
    auto supported = archs(name);
    if (std::find(supported.begin(), supported.end(), arch) == supported.end())
        throw Error(Errc::UnsupportedArch, "sequence '" + name + "' is not available on " + arch_name(arch));

    const auto& kv = it->second;
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto o = kv.find(std::string(arch_name(arch)) + "." + key);
        if (o != kv.end()) return o->second;
        auto b = kv.find(key);
        if (b != kv.end()) return b->second;
        return std::nullopt;
    };
    auto number = [&](const std::string& key, double fallback) {
        auto v = get(key);
        if (!v) return fallback;
        try {
            return std::stod(*v);
        } catch (const std::exception&) {
            throw Error(Errc::Parse, name + "." + key + ": not a number");
        }
    };

    SequenceProfile p;
    p.name = name;
    p.arch = arch;
    p.sequence = InstructionSequence::parse(name, get("body").value_or(""));
    p.kind = parse_request_kind(get("kind").value_or("flush-read"));
    p.cache_hit_fraction = number("hit_fraction", 0.0);
    p.warmup_iterations = static_cast<int>(number("warmup", 0));
    p.fence_free_counterpart = get("fence_free").value_or("");
    p.approximate = get("approximate").value_or("false") == "true";
    p.dram_access_per_flush_on_invalid_line = get("dram_access").value_or("true") == "true";

    std::vector<Picos> gaps;
    if (auto g = get("gaps")) {
        for (const auto& s : split_ws(*g)) gaps.push_back(parse_duration(s));
    } else if (auto r = get("rate")) {
        // Low-rate entries give a target ACTs/tREFI; two requests per iteration.
        double rate = number("rate", 0);
        if (!(rate > 0)) throw Error(Errc::InvalidConfig, name + ": rate must be positive");
        auto gap = static_cast<Picos>(std::llround(double(timing::TimingParams{}.t_refi) / rate));
        gaps = {gap, gap};
    }
    if (gaps.empty()) throw Error(Errc::InvalidConfig, name + ": needs gaps or rate");
    p.inter_iteration_gap = gaps.back();
    gaps.pop_back();
    p.intra_iteration_gaps = std::move(gaps);
    p.validate();
    return p;
}

// ---- streams ---------------------------------------------------------------

RequestStream::RequestStream(const SequenceProfile& profile, std::array<std::uint64_t, 2> va, Picos start,
                             Picos duration, std::uint64_t seed)
    : profile_(profile), va_(va), end_(start + std::max<Picos>(duration, 0)), t_(start), seed_(seed) {
    profile_.validate();
    t_ += profile_.warmup_iterations * profile_.iteration_period();
}

bool RequestStream::is_hit(std::uint64_t index) {
    const double f = profile_.cache_hit_fraction;
    if (f <= 0.0) return false;
    if (f >= 1.0) return true;
    const std::uint64_t block = index / 100;
    if (block != block_) {
        block_ = block;
        const auto k = static_cast<int>(std::lround(f * 100));
        std::array<std::pair<std::uint64_t, int>, 100> order;
        for (int i = 0; i < 100; ++i) order[i] = {hash_key(seed_, {block, static_cast<std::uint64_t>(i)}), i};
        std::sort(order.begin(), order.end());
        block_hits_.fill(false);
        for (int i = 0; i < k; ++i) block_hits_[order[i].second] = true;
    }
    return block_hits_[index % 100];
}

std::optional<MemoryRequest> RequestStream::next() {
    if (!profile_.dram_access_per_flush_on_invalid_line) return std::nullopt;
    const int per_iter = profile_.requests_per_iteration();
    while (t_ < end_) {
        const std::uint64_t i = index_++;
        const int slot = static_cast<int>(i % per_iter);
        const Picos t = t_;
        t_ += slot + 1 < per_iter ? profile_.intra_iteration_gaps[slot] : profile_.inter_iteration_gap;
        ++candidates_;
        if (is_hit(i)) {
            ++hits_;
            continue;
        }
        return MemoryRequest{t, profile_.kind, va_[i % 2]};
    }
    return std::nullopt;
}

void check_address_pair(const addr::MappingConfig& map, std::array<std::uint64_t, 2> va) {
    auto a = addr::phys_to_logical(map, addr::virt_to_phys(map, va[0]));
    auto b = addr::phys_to_logical(map, addr::virt_to_phys(map, va[1]));
    if (!(a.bank == b.bank) || a.rank != b.rank || a.dimm != b.dimm || a.channel != b.channel)
        throw Error(Errc::AddressesDifferentBanks, "addresses map to different banks");
    if (a.row == b.row) throw Error(Errc::AddressesSameRow, "both addresses map to row " + to_hex(a.row));
}

std::vector<MemoryRequest> generate_stream(const SequenceProfile& profile, const addr::MappingConfig& map,
                                           std::array<std::uint64_t, 2> va, Picos duration, std::uint64_t seed,
                                           Picos start) {
    if (duration < 0) throw Error(Errc::OutOfRange, "negative duration");
    check_address_pair(map, va);
    RequestStream s(profile, va, start, duration, seed);
    std::vector<MemoryRequest> out;
    while (auto r = s.next()) out.push_back(*r);
    return out;
}

}  // namespace rhsim::cpu
