#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rhsim/adjacency.hpp"
#include "rhsim/cpu_model.hpp"
#include "rhsim/dram_device.hpp"
#include "rhsim/mem_controller.hpp"

namespace rhsim {
class KvConfig;
}

namespace rhsim::orch {

/// Rows per bank implied by the reported single-bank test time at 128 ms
/// per row (41,760 s / 0.128 s).
constexpr std::uint64_t kReferenceBankRows = 326'250;

struct TestPlan {
    std::shared_ptr<const dram::DeviceProfile> profile;
    /// Default: the profile's own topology over [first, last).
    std::shared_ptr<const adj::AdjacencyMap> map;
    std::vector<unsigned> banks{0};
    std::uint32_t first = 0;
    std::uint32_t last = 0;
    Picos window = 128 * kPsPerMs;  ///< per pass, simulated
    /// Divides the window for cheap equivalence runs; 1 is the real test.
    double window_scale = 1.0;
    std::string sequence = "clflushopt-pair";
    cpu::Arch arch = cpu::Arch::Skylake;
    std::uint64_t aggressor_pattern = dram::kAllZeros;
    std::uint64_t victim_pattern = dram::kAllOnes;
    unsigned batch = 1;           ///< rows per check
    unsigned parallel_banks = 8;  ///< banks tested concurrently
    mc::ControllerConfig controller;
    std::uint64_t seed = 1;

    Picos effective_window() const;
    /// Throws Error(InvalidConfig).
    void validate() const;
    /// Keys: profile, banks, first, last, window, window_scale, sequence,
    /// arch, aggressor_pattern, pattern, batch, parallel_banks, seed, controller.*.
    static TestPlan from_config(const KvConfig& cfg);
};

/// One hammer pass: the two aggressor rows driven by a single hart.
struct Pass {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    friend bool operator==(const Pass&, const Pass&) = default;
};

/// Passes needed to test `row`: one per distinct aggressor set across the
/// two bit halves. A lone neighbor is paired with `dummy`.
/// Throws Error(MissingAdjacency).
std::vector<Pass> plan_passes(const adj::AdjacencyMap& map, std::uint32_t row, std::uint32_t dummy);

struct RowResult {
    unsigned bank = 0;
    std::uint32_t row = 0;
    bool pass = true;
    std::size_t flip_count = 0;  ///< 1->0 flips in the tested row
    std::vector<dram::FlipReport::Flip> flips;
    unsigned passes = 0;

    friend bool operator==(const RowResult&, const RowResult&) = default;
};

struct TestResult {
    std::vector<RowResult> rows;  ///< ordered by (bank, row)
    std::uint64_t checks = 0;
    std::uint64_t passes = 0;
    Picos simulated_time = 0;  ///< summed over banks

    bool all_pass() const;
    std::size_t failures() const;
    /// Header `bank,row,pass,flip_count`.
    std::string to_csv() const;
    std::string summary_json(const TestPlan& plan) const;
};

/// Rows of a batch must not share aggressors or hammer one another.
std::vector<std::vector<std::uint32_t>> make_batches(const adj::AdjacencyMap& map,
                                                      const std::vector<std::uint32_t>& rows, unsigned batch);

RowResult run_row_test(const TestPlan& plan, unsigned bank, std::uint32_t row);
TestResult run_bank_test(const TestPlan& plan);

/// rows x window, as seconds.
double projected_seconds(std::uint64_t rows, Picos window);
/// e.g. "11h36m".
std::string format_hours(double seconds);

}  // namespace rhsim::orch
