#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "rhsim/adjacency.hpp"
#include "rhsim/dram_device.hpp"
#include "rhsim/protocol.hpp"

namespace rhsim::infer {

struct Thresholds {
    double noise = 0.01;         ///< rows below this density are dropped
    double purity = 0.99;        ///< share of flips in one bit half for a half verdict
    double whole_minor = 0.25;   ///< minimum minority-half share for a whole verdict
};

struct Verdict {
    std::uint32_t aggressor = 0;
    std::uint32_t victim = 0;
    adj::Kind kind = adj::Kind::Whole;
    double density = 0;
};

/// Single-sided injection run against `aggressor` with refreshes
/// suppressed for `hold`; returns the flips of `scenario.bank`, limited to
/// the aggressor's half of the bank when the dummy lies in the other half.
dram::FlipReport hammer_survey(const inject::Scenario& scenario, std::uint32_t aggressor,
                               Picos hold = 15 * kPsPerSec);

/// Verdicts for one aggressor's report. Rows in `exclude` (the aggressor
/// and the dummy) are ignored. Throws Error(AmbiguousSupport).
std::vector<Verdict> classify(const dram::FlipReport& report, unsigned bank, std::uint32_t aggressor,
                              const Thresholds& th = {}, const std::vector<std::uint32_t>& exclude = {});

/// Assembles the map; a half with fewer than two neighbors is marked edge.
adj::AdjacencyMap build_map(const std::vector<std::uint32_t>& surveyed, const std::vector<Verdict>& verdicts);

/// Noise threshold in the widest gap of the log-density histogram, or
/// nullopt when the densities do not split in two groups.
std::optional<double> suggest_threshold(std::vector<double> densities);

struct InferenceResult {
    adj::AdjacencyMap map;
    std::vector<Verdict> verdicts;
    /// (aggressor, row, density) for every row with a flip.
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> densities;
    std::optional<double> suggested_noise;

    /// Header `aggressor,row,density`.
    std::string density_csv() const;
};

struct InferOptions {
    Thresholds thresholds;
    Picos hold = 15 * kPsPerSec;
    unsigned workers = 0;  ///< 0: hardware concurrency
};

/// Surveys every row in [first, last) and infers the map of that range.
InferenceResult infer_range(const inject::Scenario& scenario, std::uint32_t first, std::uint32_t last,
                            const InferOptions& opt = {});

}  // namespace rhsim::infer
