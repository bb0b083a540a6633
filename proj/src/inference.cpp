#include "rhsim/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "rhsim/error.hpp"
#include "rhsim/hashing.hpp"
#include "rhsim/kvconfig.hpp"

namespace rhsim::infer {

dram::FlipReport hammer_survey(const inject::Scenario& scenario, std::uint32_t aggressor, Picos hold) {
    auto sc = scenario;
    sc.aggressor = aggressor;
    const auto rows = sc.profile->rows_per_bank;
    const auto dummy = sc.dummy.value_or(inject::default_dummy(aggressor, rows));
    auto flips = inject::run_protocol(inject::ProtocolScript::standard(hold), sc).flips;
    // The dummy disturbs its own neighbors; when it sits in the other half of
    // the bank, only the aggressor's half is inspected.
    const std::uint32_t half = rows / 2;
    if ((aggressor < half) != (dummy < half)) {
        const std::uint32_t lo = aggressor < half ? 0 : half;
        return flips.restrict(sc.bank, lo, lo + half);
    }
    return flips.restrict(sc.bank, 0, rows);
}

std::vector<Verdict> classify(const dram::FlipReport& report, unsigned bank, std::uint32_t aggressor,
                              const Thresholds& th, const std::vector<std::uint32_t>& exclude) {
    std::vector<Verdict> out;
    for (const auto& [key, flips] : report.rows()) {
        if (key.first != bank || key.second == aggressor) continue;
        if (std::find(exclude.begin(), exclude.end(), key.second) != exclude.end()) continue;
        const double density = double(flips.size()) / dram::kBitsPerRow;
        if (density < th.noise) continue;
        std::size_t low = 0;
        for (const auto& f : flips) low += f.bit < 32;
        const double low_share = double(low) / flips.size();
        const double minor = std::min(low_share, 1.0 - low_share);
        Verdict v{aggressor, key.second, adj::Kind::Whole, density};
        if (low_share >= th.purity)
            v.kind = adj::Kind::HalfLow;
        else if (1.0 - low_share >= th.purity)
            v.kind = adj::Kind::HalfHigh;
        else if (minor < th.whole_minor)
            throw Error(Errc::AmbiguousSupport, "aggressor " + to_hex(aggressor) + ", victim " + to_hex(key.second) +
                                                    ": " + std::to_string(int(std::lround(low_share * 100))) +
                                                    "% of flips in bits 0-31");
        out.push_back(v);
    }
    return out;
}

adj::AdjacencyMap build_map(const std::vector<std::uint32_t>& surveyed, const std::vector<Verdict>& verdicts) {
    adj::AdjacencyMap m;
    for (auto r : surveyed) m.entry(r);
    for (const auto& v : verdicts) m.add(v.aggressor, {v.victim, v.kind});
    for (auto r : surveyed) {
        const auto* e = m.find(r);
        for (int h = 0; h < 2; ++h) {
            int deg = 0;
            for (const auto& n : e->victims) deg += adj::kind_covers(n.kind, h);
            if (deg < 2) m.set_edge(r, h);
        }
    }
    return m;
}

std::optional<double> suggest_threshold(std::vector<double> densities) {
    std::vector<double> logs;
    for (double d : densities)
        if (d > 0) logs.push_back(std::log10(d));
    if (logs.size() < 2) return std::nullopt;
    std::sort(logs.begin(), logs.end());
    double best = 0, at = 0;
    for (std::size_t i = 1; i < logs.size(); ++i)
        if (logs[i] - logs[i - 1] > best) {
            best = logs[i] - logs[i - 1];
            at = (logs[i] + logs[i - 1]) / 2;
        }
    // Less than a decade apart is not a bimodal split.
    if (best < 1.0) return std::nullopt;
    return std::pow(10.0, at);
}

std::string InferenceResult::density_csv() const {
    std::ostringstream os;
    os << "aggressor,row,density\n";
    for (const auto& [a, r, d] : densities) os << to_hex(a) << ',' << to_hex(r) << ',' << d << '\n';
    return os.str();
}

InferenceResult infer_range(const inject::Scenario& scenario, std::uint32_t first, std::uint32_t last,
                            const InferOptions& opt) {
    if (!scenario.profile) throw Error(Errc::InvalidConfig, "scenario has no device profile");
    last = std::min(last, scenario.profile->rows_per_bank);
    std::vector<std::uint32_t> rows;
    for (auto r = first; r < last; ++r) rows.push_back(r);

    std::vector<dram::FlipReport> reports(rows.size());
    std::vector<std::uint32_t> dummies(rows.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (std::size_t i; (i = next++) < rows.size();) {
            try {
                auto sc = scenario;
                sc.seed = hash_key(scenario.seed, {rows[i]});
                dummies[i] = sc.dummy.value_or(inject::default_dummy(rows[i], sc.profile->rows_per_bank));
                reports[i] = hammer_survey(sc, rows[i], opt.hold);
            } catch (...) {
                std::lock_guard lk(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned n = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, std::max<std::size_t>(rows.size(), 1));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    InferenceResult res;
    std::vector<double> all;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& [key, flips] : reports[i].rows()) {
            if (key.second == rows[i] || key.second == dummies[i]) continue;
            const double d = double(flips.size()) / dram::kBitsPerRow;
            res.densities.emplace_back(rows[i], key.second, d);
            all.push_back(d);
        }
        auto v = classify(reports[i], scenario.bank, rows[i], opt.thresholds, {dummies[i]});
        res.verdicts.insert(res.verdicts.end(), v.begin(), v.end());
    }
    res.suggested_noise = suggest_threshold(all);
    res.map = build_map(rows, res.verdicts);
    return res;
}

}  // namespace rhsim::infer
