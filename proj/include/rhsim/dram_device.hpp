#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rhsim/adjacency.hpp"
#include "rhsim/ddr_protocol.hpp"
#include "rhsim/timing.hpp"
#include "rhsim/units.hpp"

namespace rhsim {
class KvConfig;
}

namespace rhsim::dram {

constexpr std::uint32_t kWordsPerRow = ddr::kColumns;
constexpr std::uint32_t kBitsPerRow = kWordsPerRow * 64;  // 65,536

// Seed patterns used throughout the experiments.
constexpr std::uint64_t kAllOnes = ~std::uint64_t{0};
constexpr std::uint64_t kAllZeros = 0;
constexpr std::uint64_t kTwoThirdsOnes = 0xB6DB6DB6DB6DB6DBULL;
constexpr std::uint64_t kOneThirdOnes = 0x4924924924924924ULL;

/// Parses all-1s / all-0s / two-thirds / one-third or a hex word.
std::uint64_t parse_pattern(const std::string& name);

/// Per-cell flip probabilities at saturation for one aggressor/victim link.
struct CellProbs {
    double p1 = 0;  ///< cell stores 1 (charged true-cell)
    double p0 = 0;
};

struct DeviceProfile {
    std::string vendor = "custom";
    std::string description;
    std::uint32_t rows_per_bank = 1u << 17;
    unsigned banks = ddr::kBanks;
    std::shared_ptr<const adj::Topology> topology;

    /// Saturated per-cell flip probability, indexed [half ? 1 : 0][stored bit].
    std::array<std::array<double, 2>, 2> p_max{{{0.038, 0.797}, {0.0368, 0.772}}};
    /// Saturation scale: p = p_max * (1 - exp(-N / n0)).
    double n0 = 217'147;

    /// Probability that a row holds exactly one / two weak cells.
    double retention_one = 0.033;
    double retention_two = 0.007;
    Picos retention_threshold = 15 * kPsPerSec;

    /// Simulated hold windows are shortened by this factor; elapsed time is
    /// multiplied back when judging retention.
    double time_scale = 1.0;

    timing::TimingParams timing;

    /// Directed (aggressor, victim) -> fraction of victim row bits flipped
    /// at saturation with all-1s data. Overrides p_max for that link.
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> strength;

    CellProbs cell_probs(std::uint32_t aggressor, std::uint32_t victim, adj::Kind kind) const;

    /// Throws Error(InvalidConfig) when an invariant is broken.
    void validate() const;

    static DeviceProfile from_config(const KvConfig& cfg);
    static DeviceProfile load(const std::string& path);
    /// vendor1, vendor2 or vendor3. Throws Error(InvalidConfig).
    static DeviceProfile builtin(const std::string& name);
    static std::vector<std::string> builtin_names();
    /// Generated layout: rows past the tested range are scratch; saturation
    /// and time scale are shrunk so a survey is cheap.
    static DeviceProfile synthetic(std::uint64_t seed, const adj::SyntheticOptions& opt = {});
    /// Built-in name, `synthetic:<seed>` or a path to a profile file.
    static DeviceProfile named(const std::string& spec);
};

/// Flip list per (bank, row); aggregate counts are computed on demand.
class FlipReport {
  public:
    struct Flip {
        std::uint16_t word = 0;
        std::uint8_t bit = 0;
        bool to_one = false;  ///< direction: false = 1->0

        friend bool operator==(const Flip&, const Flip&) = default;
    };
    using Key = std::pair<unsigned, std::uint32_t>;  ///< (bank, row)

    void add(unsigned bank, std::uint32_t row, Flip f) { rows_[{bank, row}].push_back(f); }
    void merge(const FlipReport& other);

    const std::map<Key, std::vector<Flip>>& rows() const { return rows_; }
    const std::vector<Flip>* flips(unsigned bank, std::uint32_t row) const;

    std::size_t total(unsigned bank, std::uint32_t row) const;
    std::size_t total() const;
    double density(unsigned bank, std::uint32_t row) const { return double(total(bank, row)) / kBitsPerRow; }
    std::size_t count_direction(unsigned bank, std::uint32_t row, bool to_one) const;
    std::vector<std::uint32_t> per_word(unsigned bank, std::uint32_t row) const;  ///< 1024 entries
    std::vector<std::uint32_t> per_bit(unsigned bank, std::uint32_t row) const;   ///< 64 entries

    /// Keeps rows of `bank` in [first, last) only.
    FlipReport restrict(unsigned bank, std::uint32_t first, std::uint32_t last) const;

    /// Header `bank,row,word,bit,direction`, direction is `1to0` or `0to1`.
    std::string to_csv() const;
    static FlipReport from_csv(const std::string& text);

  private:
    std::map<Key, std::vector<Flip>> rows_;
};

struct ApplyResult {
    ddr::Command cmd;
    bool alert = false;        ///< CA parity mismatch
    std::uint64_t data = 0;    ///< RD data
};

/// One DIMM rank: mode registers, row buffers, sparse cell arrays and the
/// disturbance/retention fault models.
class Device {
  public:
    Device(std::shared_ptr<const DeviceProfile> profile, std::uint64_t seed);

    const DeviceProfile& profile() const { return *profile_; }

    /// Decodes and executes one bus sample. A command with bad parity still
    /// executes; the mismatch is reported as an alert.
    ApplyResult apply(const ddr::SignalWord& w, Picos t, std::uint64_t wr_data = 0);
    /// Executes an already decoded command. Returns RD data.
    std::uint64_t execute(const ddr::Command& cmd, Picos t, std::uint64_t wr_data = 0);

    std::uint32_t mode_register(unsigned i) const { return mode_regs_.at(i); }
    const std::array<std::uint32_t, ddr::kModeRegisters>& mode_registers() const { return mode_regs_; }
    bool parity_enabled() const { return (mode_regs_[5] & 0x7u) != 0; }
    std::optional<std::uint32_t> open_row(unsigned bank) const { return open_[bank]; }

    // Direct array access for seeding and inspection; bypasses timing.
    void fill_bank(unsigned bank, std::uint64_t pattern);
    void fill_all(std::uint64_t pattern);
    void write_row(unsigned bank, std::uint32_t row, const std::vector<std::uint64_t>& data);
    void write_row(unsigned bank, std::uint32_t row, std::uint64_t pattern);
    std::vector<std::uint64_t> read_row(unsigned bank, std::uint32_t row) const;
    std::uint64_t read_word(unsigned bank, std::uint32_t row, unsigned word) const;

    /// Disturbance accumulated since the last REF (count) and the largest
    /// count folded at any REF since the last resolve (peak).
    std::uint32_t disturbance(unsigned bank, std::uint32_t row, int half) const;
    std::uint32_t disturbance_peak(unsigned bank, std::uint32_t row, int half) const;

    /// Turns accumulated disturbance into flips, then applies retention
    /// failures if `elapsed_without_refresh` (already time-scaled) reaches the
    /// profile threshold. Flips are written back to the array; counters reset.
    FlipReport resolve_flips(Picos elapsed_without_refresh, std::uint64_t rng_seed);

    /// Weak-cell count (0..2) drawn for a row.
    int weak_cells(unsigned bank, std::uint32_t row) const;

    std::uint64_t refs_delivered() const { return refs_; }
    std::uint64_t acts() const { return acts_; }
    /// Longest interval without a delivered REF since the last resolve,
    /// including the ongoing one up to `now`.
    Picos longest_ref_gap(Picos now) const;

  private:
    struct Counter {
        std::uint32_t count = 0;
        std::uint32_t peak = 0;
        float p1 = 0;
        float p0 = 0;
        bool dirty = false;
    };
    struct VictimHalf {
        std::uint32_t row;
        std::uint8_t half;
        float p1, p0;
    };
    struct Row {
        std::vector<std::uint64_t> full;                             ///< empty: pattern + deltas
        std::vector<std::pair<std::uint16_t, std::uint64_t>> xors;   ///< sparse XOR against pattern
    };
    struct Bank {
        std::uint64_t pattern = 0;
        std::unordered_map<std::uint32_t, Row> rows;
        std::vector<Counter> counters;  ///< rows * 2, allocated on first ACT
    };

    void check_row(std::uint32_t row) const;
    const std::vector<VictimHalf>& victims_of(std::uint32_t aggressor);
    void flip_bit(Bank& b, std::uint32_t row, unsigned word, unsigned bit);
    std::uint64_t word_of(const Bank& b, std::uint32_t row, unsigned word) const;
    void set_word(Bank& b, std::uint32_t row, unsigned word, std::uint64_t value);
    void on_ref(Picos t);

    std::shared_ptr<const DeviceProfile> profile_;
    std::uint64_t seed_;
    std::array<std::uint32_t, ddr::kModeRegisters> mode_regs_{};
    std::vector<std::optional<std::uint32_t>> open_;
    std::vector<Bank> banks_;
    std::vector<std::pair<unsigned, std::uint32_t>> dirty_;  ///< (bank, counter index)
    std::unordered_map<std::uint32_t, std::vector<VictimHalf>> victim_cache_;

    std::uint64_t refs_ = 0;
    std::uint64_t acts_ = 0;
    Picos last_ref_ = 0;
    Picos longest_gap_ = 0;
};

}  // namespace rhsim::dram
