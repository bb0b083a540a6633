#include "rhsim/adjacency.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <set>
#include <sstream>

#include "rhsim/error.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/units.hpp"

namespace rhsim::adj {

const char* kind_tag(Kind k) {
    switch (k) {
        case Kind::Whole: return "W";
        case Kind::HalfLow: return "L";
        case Kind::HalfHigh: return "H";
    }
    return "?";
}

Kind parse_kind(const std::string& tag) {
    if (tag == "W" || tag == "whole") return Kind::Whole;
    if (tag == "L" || tag == "half-low") return Kind::HalfLow;
    if (tag == "H" || tag == "half-high") return Kind::HalfHigh;
    throw Error(Errc::Parse, "unknown adjacency kind '" + tag + "'");
}

// ---- AdjacencyMap ----------------------------------------------------------

void AdjacencyMap::add(std::uint32_t aggressor, Neighbor v) {
    auto& vs = entries_[aggressor].victims;
    auto it = std::lower_bound(vs.begin(), vs.end(), v);
    if (it == vs.end() || !(*it == v)) vs.insert(it, v);
}

void AdjacencyMap::set_edge(std::uint32_t row, int half, bool on) { entries_[row].edge.at(half) = on; }

const AdjacencyMap::Entry* AdjacencyMap::find(std::uint32_t row) const {
    auto it = entries_.find(row);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string AdjacencyMap::check_symmetric() const {
    std::ostringstream os;
    for (const auto& [row, e] : entries_) {
        for (const auto& v : e.victims) {
            const Entry* back = find(v.row);
            if (!back) continue;  // victim outside the mapped range
            bool ok = std::find(back->victims.begin(), back->victims.end(), Neighbor{row, v.kind}) != back->victims.end();
            if (!ok) os << to_hex(row) << " -> " << to_hex(v.row) << ":" << kind_tag(v.kind) << " has no mirror\n";
        }
    }
    return os.str();
}

std::string AdjacencyMap::to_text() const {
    std::ostringstream os;
    for (const auto& [row, e] : entries_) {
        os << "adj = " << to_hex(row, 4);
        for (const auto& v : e.victims) os << ' ' << to_hex(v.row, 4) << ':' << kind_tag(v.kind);
        if (e.edge[0]) os << " edge:L";
        if (e.edge[1]) os << " edge:H";
        os << '\n';
    }
    return os.str();
}

AdjacencyMap AdjacencyMap::from_config(const KvConfig& cfg) {
    AdjacencyMap m;
    for (const auto* e : cfg.all("adj")) {
        auto parts = split_ws(e->value);
        if (parts.empty()) throw Error(Errc::Parse, "line " + std::to_string(e->line) + ": empty adj entry");
        auto row = static_cast<std::uint32_t>(parse_uint(parts[0]));
        m.entry(row);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            auto colon = parts[i].find(':');
            if (colon == std::string::npos)
                throw Error(Errc::Parse, "line " + std::to_string(e->line) + ": expected <row>:<W|L|H>");
            auto lhs = parts[i].substr(0, colon);
            auto rhs = parts[i].substr(colon + 1);
            if (lhs == "edge") {
                m.set_edge(row, parse_kind(rhs) == Kind::HalfHigh ? 1 : 0);
            } else {
                m.add(row, {static_cast<std::uint32_t>(parse_uint(lhs)), parse_kind(rhs)});
            }
        }
    }
    return m;
}

// ---- Topology ---------------------------------------------------------------

AdjacencyMap Topology::to_map(std::uint32_t first, std::uint32_t last) const {
    AdjacencyMap m;
    last = std::min(last, rows());
    for (std::uint32_t r = first; r < last; ++r) {
        m.entry(r);
        for (const auto& n : neighbors(r)) m.add(r, n);
        for (int h = 0; h < 2; ++h)
            if (half_degree(r, h) < 2) m.set_edge(r, h);
    }
    return m;
}

Layout::Layout(std::vector<std::int32_t> low, std::vector<std::int32_t> high) {
    seq_[0] = std::move(low);
    seq_[1] = std::move(high);
    std::uint32_t n = 0;
    for (auto r : seq_[0])
        if (r != kSpare) ++n;
    rows_ = n;
    for (int h = 0; h < 2; ++h) {
        std::vector<bool> seen(rows_, false);
        std::uint32_t count = 0;
        for (auto r : seq_[h]) {
            if (r == kSpare) continue;
            if (r < 0 || static_cast<std::uint32_t>(r) >= rows_ || seen[r])
                throw Error(Errc::InvalidConfig, "layout sequence is not a permutation");
            seen[r] = true;
            ++count;
        }
        if (count != rows_) throw Error(Errc::InvalidConfig, "layout sequences cover different rows");
        reindex(h);
    }
}

std::vector<std::int32_t> Layout::make_sequence(const std::string& spec, std::uint32_t rows) {
    auto parts = split_ws(spec);
    std::vector<std::int32_t> seq;
    seq.reserve(rows);
    if (parts.empty() || parts[0] == "identity" || parts[0] == "linear") {
        for (std::uint32_t r = 0; r < rows; ++r) seq.push_back(static_cast<std::int32_t>(r));
        return seq;
    }
    if (parts[0] == "block-reversed" && parts.size() == 2) {
        auto block = static_cast<std::uint32_t>(parse_uint(parts[1]));
        if (block == 0 || rows % block) throw Error(Errc::InvalidConfig, "block size must divide rows_per_bank");
        for (std::uint32_t b = rows / block; b-- > 0;)
            for (std::uint32_t i = 0; i < block; ++i) seq.push_back(static_cast<std::int32_t>(b * block + i));
        return seq;
    }
    throw Error(Errc::Parse, "unknown layout '" + spec + "'");
}

void Layout::reindex(int half) {
    pos_[half].assign(rows_, -1);
    for (std::size_t i = 0; i < seq_[half].size(); ++i)
        if (seq_[half][i] != kSpare) pos_[half][seq_[half][i]] = static_cast<std::int32_t>(i);
}

std::array<std::int32_t, 2> Layout::around(std::uint32_t row, int half) const {
    const auto& s = seq_[half];
    auto p = pos_[half][row];
    std::int32_t left = p > 0 ? s[p - 1] : kSpare;
    std::int32_t right = static_cast<std::size_t>(p) + 1 < s.size() ? s[p + 1] : kSpare;
    return {left, right};
}

std::vector<Neighbor> Layout::neighbors(std::uint32_t row) const {
    if (row >= rows_) throw Error(Errc::OutOfRange, "row " + to_hex(row));
    auto lo = around(row, 0);
    auto hi = around(row, 1);
    std::vector<Neighbor> out;
    auto in = [](const std::array<std::int32_t, 2>& a, std::int32_t r) { return a[0] == r || a[1] == r; };
    for (auto r : lo) {
        if (r == kSpare) continue;
        out.push_back({static_cast<std::uint32_t>(r), in(hi, r) ? Kind::Whole : Kind::HalfLow});
    }
    for (auto r : hi) {
        if (r == kSpare || in(lo, r)) continue;
        out.push_back({static_cast<std::uint32_t>(r), Kind::HalfHigh});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int Layout::half_degree(std::uint32_t row, int half) const {
    if (row >= rows_) throw Error(Errc::OutOfRange, "row " + to_hex(row));
    auto a = around(row, half);
    return (a[0] != kSpare) + (a[1] != kSpare);
}

void Layout::move_after(int half, std::uint32_t row, std::uint32_t after) {
    if (row >= rows_ || after >= rows_ || row == after) throw Error(Errc::InvalidConfig, "bad layout move");
    auto& s = seq_[half];
    s.erase(s.begin() + pos_[half][row]);
    reindex(half);
    s.insert(s.begin() + pos_[half][after] + 1, static_cast<std::int32_t>(row));
    reindex(half);
}

void Layout::swap_rows(int half, std::uint32_t a, std::uint32_t b) {
    if (a >= rows_ || b >= rows_) throw Error(Errc::InvalidConfig, "bad layout swap");
    std::swap(seq_[half][pos_[half][a]], seq_[half][pos_[half][b]]);
    reindex(half);
}

void Layout::insert_spare_after(int half, std::uint32_t after) {
    if (after >= rows_) throw Error(Errc::InvalidConfig, "bad spare position");
    auto& s = seq_[half];
    s.insert(s.begin() + pos_[half][after] + 1, kSpare);
    reindex(half);
}

std::vector<Neighbor> MapTopology::neighbors(std::uint32_t row) const {
    if (row >= rows_) throw Error(Errc::OutOfRange, "row " + to_hex(row));
    const auto* e = map_.find(row);
    return e ? e->victims : std::vector<Neighbor>{};
}

int MapTopology::half_degree(std::uint32_t row, int half) const {
    int n = 0;
    for (const auto& v : neighbors(row))
        if (kind_covers(v.kind, half)) ++n;
    return std::min(n, 2);
}

std::shared_ptr<Layout> layout_from_config(const KvConfig& cfg, std::uint32_t rows) {
    auto layout = std::make_shared<Layout>(Layout::make_sequence(cfg.get_or("layout.low", "identity"), rows),
                                           Layout::make_sequence(cfg.get_or("layout.high", "identity"), rows));
    auto halves = [](const std::string& key) -> std::vector<int> {
        auto dot = key.rfind('.');
        auto suffix = key.substr(dot + 1);
        if (suffix == "low") return {0};
        if (suffix == "high") return {1};
        if (suffix == "both") return {0, 1};
        throw Error(Errc::Parse, "bad half suffix in '" + key + "'");
    };
    // Edits apply in file order.
    for (const auto& e : cfg.entries()) {
        if (!e.section.empty()) continue;
        const bool is_move = e.key.rfind("move.", 0) == 0;
        const bool is_swap = e.key.rfind("swap.", 0) == 0;
        const bool is_spare = e.key.rfind("spare.", 0) == 0;
        if (!is_move && !is_swap && !is_spare) continue;
        auto parts = split_ws(e.value);
        if (parts.size() != (is_spare ? 1u : 2u))
            throw Error(Errc::Parse, "line " + std::to_string(e.line) + ": wrong operand count for " + e.key);
        auto a = static_cast<std::uint32_t>(parse_uint(parts[0]));
        for (int h : halves(e.key)) {
            if (is_spare) {
                layout->insert_spare_after(h, a);
            } else {
                auto b = static_cast<std::uint32_t>(parse_uint(parts[1]));
                if (is_move) layout->move_after(h, a, b);
                else layout->swap_rows(h, a, b);
            }
        }
    }
    return layout;
}

// ---- verification -----------------------------------------------------------

std::string MapDiff::to_text() const {
    std::ostringstream os;
    for (const auto& m : missing) os << "- " << m << '\n';
    for (const auto& x : extra) os << "+ " << x << '\n';
    return os.str();
}

namespace {

std::set<std::string> facts(const AdjacencyMap& m) {
    std::set<std::string> out;
    for (const auto& [row, e] : m.entries()) {
        for (const auto& v : e.victims) out.insert(to_hex(row, 4) + " " + to_hex(v.row, 4) + ":" + kind_tag(v.kind));
        if (e.edge[0]) out.insert(to_hex(row, 4) + " edge:L");
        if (e.edge[1]) out.insert(to_hex(row, 4) + " edge:H");
    }
    return out;
}

}  // namespace

MapDiff verify_map(const AdjacencyMap& inferred, const AdjacencyMap& truth) {
    auto a = facts(inferred);
    auto b = facts(truth);
    MapDiff d;
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(d.missing));
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d.extra));
    return d;
}

// ---- synthetic maps -----------------------------------------------------------

std::shared_ptr<Layout> generate_synthetic_layout(std::uint64_t seed, const SyntheticOptions& opt) {
    if (opt.tested_rows < 4) throw Error(Errc::InvalidConfig, "synthetic layout needs at least 4 rows");
    std::mt19937_64 rng(seed);
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) {  // inclusive
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };
    const std::uint32_t n = opt.tested_rows;
    std::vector<std::int32_t> low(n), high;
    for (std::uint32_t r = 0; r < n; ++r) low[r] = static_cast<std::int32_t>(r);
    high = low;

    for (int i = 0, k = static_cast<int>(pick(1, opt.max_block_flips)); i < k; ++i) {
        auto len = pick(2, 8);
        auto at = pick(0, n - len);
        std::reverse(high.begin() + at, high.begin() + at + len);
    }
    for (int i = 0, k = static_cast<int>(pick(0, opt.max_swaps)); i < k; ++i) {
        auto a = pick(0, n - 1);
        auto b = std::min<std::uint64_t>(n - 1, a + pick(1, 6));
        std::swap(low[a], low[b]);
    }
    for (auto* s : {&low, &high}) {
        for (int i = 0, k = static_cast<int>(pick(0, opt.max_spares)); i < k; ++i)
            s->insert(s->begin() + pick(1, s->size() - 1), Layout::kSpare);
    }

    const std::uint32_t total = std::bit_ceil(n + opt.scratch_rows);
    for (auto* s : {&low, &high}) {
        s->push_back(Layout::kSpare);
        for (std::uint32_t r = n; r < total; ++r) s->push_back(static_cast<std::int32_t>(r));
    }
    return std::make_shared<Layout>(std::move(low), std::move(high));
}

}  // namespace rhsim::adj
