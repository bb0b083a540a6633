#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace rhsim {
class KvConfig;
}

namespace rhsim::adj {

/// How an aggressor touches a victim: across the full row, or only across
/// word bit positions 0-31 (HalfLow) or 32-63 (HalfHigh).
enum class Kind : std::uint8_t { Whole, HalfLow, HalfHigh };

const char* kind_tag(Kind k);  ///< "W", "L", "H"
Kind parse_kind(const std::string& tag);

/// Bit halves of a row: 0 = positions 0-31, 1 = positions 32-63.
constexpr bool kind_covers(Kind k, int half) {
    return k == Kind::Whole || (half == 0 ? k == Kind::HalfLow : k == Kind::HalfHigh);
}

struct Neighbor {
    std::uint32_t row = 0;
    Kind kind = Kind::Whole;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
    friend auto operator<=>(const Neighbor&, const Neighbor&) = default;
};

/// Explicit aggressor -> victims table. `edge[h]` marks a half with fewer
/// than two neighbors (spare row or bank edge).
class AdjacencyMap {
  public:
    struct Entry {
        std::vector<Neighbor> victims;  ///< sorted by (row, kind)
        std::array<bool, 2> edge{false, false};

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    void add(std::uint32_t aggressor, Neighbor v);
    void set_edge(std::uint32_t row, int half, bool on = true);
    /// Creates an empty entry so the row counts as covered.
    Entry& entry(std::uint32_t row) { return entries_[row]; }
    const Entry* find(std::uint32_t row) const;
    bool contains(std::uint32_t row) const { return entries_.count(row) != 0; }

    const std::map<std::uint32_t, Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Empty string when every victim link has its mirror (same kind).
    std::string check_symmetric() const;

    /// One `adj = ...` line per row (see docs/formats.md).
    std::string to_text() const;
    /// Reads every `adj` key in the top-level section of `cfg`.
    static AdjacencyMap from_config(const KvConfig& cfg);

    friend bool operator==(const AdjacencyMap&, const AdjacencyMap&) = default;

  private:
    std::map<std::uint32_t, Entry> entries_;
};

/// Interface the device uses to find victims of an activated row.
class Topology {
  public:
    virtual ~Topology() = default;
    virtual std::uint32_t rows() const = 0;
    virtual std::vector<Neighbor> neighbors(std::uint32_t row) const = 0;
    /// Number of physical neighbors (0..2) of `row`'s half.
    virtual int half_degree(std::uint32_t row, int half) const = 0;

    /// Ground-truth map restricted to aggressors in [first, last).
    AdjacencyMap to_map(std::uint32_t first, std::uint32_t last) const;
};

/// Physical placement of each bit-half of every row: two sequences of row
/// indices (low halves, high halves) with -1 marking spare slots. Two rows
/// whose halves sit next to each other in a sequence are adjacent for that
/// half; adjacent in both sequences means whole-row adjacency.
class Layout final : public Topology {
  public:
    static constexpr std::int32_t kSpare = -1;

    Layout(std::vector<std::int32_t> low, std::vector<std::int32_t> high);

    /// identity, linear (same as identity) or "block-reversed <n>".
    static std::vector<std::int32_t> make_sequence(const std::string& spec, std::uint32_t rows);

    std::uint32_t rows() const override { return rows_; }
    std::vector<Neighbor> neighbors(std::uint32_t row) const override;
    int half_degree(std::uint32_t row, int half) const override;

    /// Removes `row` from sequence `half` and reinserts it right after `after`.
    void move_after(int half, std::uint32_t row, std::uint32_t after);
    void swap_rows(int half, std::uint32_t a, std::uint32_t b);
    void insert_spare_after(int half, std::uint32_t after);

    const std::vector<std::int32_t>& sequence(int half) const { return seq_[half]; }

  private:
    void reindex(int half);
    std::array<std::int32_t, 2> around(std::uint32_t row, int half) const;

    std::uint32_t rows_ = 0;
    std::array<std::vector<std::int32_t>, 2> seq_;
    std::array<std::vector<std::int32_t>, 2> pos_;
};

/// Topology backed by an explicit map; rows without an entry have no neighbors.
class MapTopology final : public Topology {
  public:
    MapTopology(AdjacencyMap map, std::uint32_t rows) : map_(std::move(map)), rows_(rows) {}

    std::uint32_t rows() const override { return rows_; }
    std::vector<Neighbor> neighbors(std::uint32_t row) const override;
    int half_degree(std::uint32_t row, int half) const override;
    const AdjacencyMap& map() const { return map_; }

  private:
    AdjacencyMap map_;
    std::uint32_t rows_;
};

/// Parses `layout.low`, `layout.high` and the `move.*`, `swap.*`, `spare.*`
/// edit lines (half suffix `low`, `high` or `both`).
std::shared_ptr<Layout> layout_from_config(const KvConfig& cfg, std::uint32_t rows);

struct MapDiff {
    std::vector<std::string> missing;  ///< present in truth, absent in inferred
    std::vector<std::string> extra;    ///< present in inferred only

    bool empty() const { return missing.empty() && extra.empty(); }
    std::size_t size() const { return missing.size() + extra.size(); }
    std::string to_text() const;
};

/// Exact set comparison of victim links and edge markers.
MapDiff verify_map(const AdjacencyMap& inferred, const AdjacencyMap& truth);

struct SyntheticOptions {
    std::uint32_t tested_rows = 64;
    std::uint32_t scratch_rows = 8;  ///< placed after a spare slot, holds the dummy aggressor
    int max_block_flips = 4;         ///< reversed segments in the high sequence (half rows)
    int max_swaps = 2;               ///< swaps applied to the low sequence
    int max_spares = 2;              ///< spare slots per half sequence (edges)
};

/// Random layout mixing whole rows, half rows and edges. Rows
/// [0, tested_rows) are surveyable; scratch rows follow and never neighbor
/// them. The result spans the next power of two rows.
std::shared_ptr<Layout> generate_synthetic_layout(std::uint64_t seed, const SyntheticOptions& opt = {});

}  // namespace rhsim::adj
