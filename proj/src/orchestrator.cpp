#include "rhsim/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "rhsim/error.hpp"
#include "rhsim/hashing.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/protocol.hpp"
#include "rhsim/testbed.hpp"

namespace rhsim::orch {

namespace {

std::vector<unsigned> parse_banks(const std::string& text) {
    std::vector<unsigned> out;
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    for (const auto& tok : split_ws(s)) {
        auto dash = tok.find('-');
        if (dash == std::string::npos) {
            out.push_back(static_cast<unsigned>(parse_uint(tok)));
            continue;
        }
        auto lo = parse_uint(tok.substr(0, dash)), hi = parse_uint(tok.substr(dash + 1));
        if (hi < lo) throw Error(Errc::InvalidConfig, "bank range " + tok);
        for (auto b = lo; b <= hi; ++b) out.push_back(static_cast<unsigned>(b));
    }
    return out;
}

std::vector<std::uint32_t> neighbor_rows(const TestPlan& plan, std::uint32_t row) {
    std::vector<std::uint32_t> out;
    if (plan.map) {
        if (const auto* e = plan.map->find(row))
            for (const auto& n : e->victims) out.push_back(n.row);
    } else if (row < plan.profile->rows_per_bank) {
        for (const auto& n : plan.profile->topology->neighbors(row)) out.push_back(n.row);
    }
    return out;
}

adj::AdjacencyMap map_for(const TestPlan& plan, std::uint32_t row) {
    if (plan.map) return *plan.map;
    return plan.profile->topology->to_map(row, row + 1);
}

struct RowPlan {
    std::uint32_t row;
    std::vector<Pass> passes;
};

RowPlan plan_row(const TestPlan& plan, std::uint32_t row) {
    const auto dummy = inject::default_dummy(row, plan.profile->rows_per_bank);
    return {row, plan_passes(map_for(plan, row), row, dummy)};
}

std::vector<std::uint32_t> aggressors(const RowPlan& rp) {
    std::vector<std::uint32_t> a;
    for (const auto& p : rp.passes) {
        a.push_back(p.a);
        a.push_back(p.b);
    }
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

/// Rows written or disturbed while testing `rp`.
std::set<std::uint32_t> footprint(const TestPlan& plan, const RowPlan& rp) {
    std::set<std::uint32_t> f{rp.row};
    for (auto a : aggressors(rp)) {
        f.insert(a);
        for (auto n : neighbor_rows(plan, a)) f.insert(n);
    }
    return f;
}

std::vector<std::vector<std::uint32_t>> batches_for(const TestPlan& plan, const std::vector<RowPlan>& plans) {
    std::vector<std::vector<std::uint32_t>> out;
    if (plan.batch <= 1) {
        for (const auto& rp : plans) out.push_back({rp.row});
        return out;
    }
    // Greedy first fit: a row joins the first open batch whose footprint it
    // does not touch.
    std::vector<std::set<std::uint32_t>> used;
    for (const auto& rp : plans) {
        auto fp = footprint(plan, rp);
        std::size_t i = 0;
        for (; i < out.size(); ++i) {
            if (out[i].size() >= plan.batch) continue;
            bool clash = false;
            for (auto r : fp)
                if (used[i].count(r)) {
                    clash = true;
                    break;
                }
            if (!clash) break;
        }
        if (i == out.size()) {
            out.emplace_back();
            used.emplace_back();
        }
        out[i].push_back(rp.row);
        used[i].insert(fp.begin(), fp.end());
    }
    return out;
}

struct BankOutcome {
    std::vector<RowResult> rows;
    std::uint64_t checks = 0;
    std::uint64_t passes = 0;
    Picos time = 0;
};

BankOutcome test_bank(const TestPlan& plan, unsigned bank, const std::vector<RowPlan>& plans) {
    sim::TestbedConfig tc;
    tc.controller = plan.controller;
    tc.seed = hash_key(plan.seed, {bank});
    tc.capture = false;
    sim::Testbed tb(plan.profile, tc);
    const auto seq = cpu::Catalog::builtin().profile_for(plan.sequence, plan.arch);
    const Picos window = plan.effective_window();
    tb.boot(0);

    std::map<std::uint32_t, const RowPlan*> by_row;
    for (const auto& rp : plans) by_row[rp.row] = &rp;

    BankOutcome out;
    for (const auto& batch : batches_for(plan, plans)) {
        tb.device().fill_bank(bank, plan.victim_pattern);
        for (auto row : batch) {
            const auto& rp = *by_row.at(row);
            for (std::size_t k = 0; k < rp.passes.size(); ++k) {
                const auto& p = rp.passes[k];
                tb.device().write_row(bank, p.a, plan.aggressor_pattern);
                tb.device().write_row(bank, p.b, plan.aggressor_pattern);
                const Picos start = tb.controller().next_refresh();
                auto hart = tb.make_hart(seq, bank, p.a, p.b, start, window, hash_key(plan.seed, {bank, row, k}));
                hart.store_data = {plan.aggressor_pattern, plan.aggressor_pattern};
                tb.advance(hart, start + window);
                ++out.passes;
            }
        }
        const auto report = tb.inspect();
        ++out.checks;
        for (auto row : batch) {
            RowResult r;
            r.bank = bank;
            r.row = row;
            r.passes = static_cast<unsigned>(by_row.at(row)->passes.size());
            if (const auto* fl = report.flips(bank, row))
                for (const auto& f : *fl)
                    if (!f.to_one) r.flips.push_back(f);
            r.flip_count = r.flips.size();
            r.pass = r.flip_count == 0;
            out.rows.push_back(std::move(r));
        }
    }
    out.time = tb.now();
    return out;
}

}  // namespace

Picos TestPlan::effective_window() const {
    return static_cast<Picos>(std::llround(double(window) / window_scale));
}

void TestPlan::validate() const {
    if (!profile) throw Error(Errc::InvalidConfig, "test plan has no device profile");
    if (last < first) throw Error(Errc::InvalidConfig, "row range is reversed");
    if (last > profile->rows_per_bank) throw Error(Errc::OutOfRange, "row range beyond bank");
    for (auto b : banks)
        if (b >= profile->banks) throw Error(Errc::OutOfRange, "bank " + std::to_string(b));
    if (!(window_scale >= 1.0)) throw Error(Errc::InvalidConfig, "window_scale must be >= 1");
    // Twice the refresh window, so every pass spans one full window.
    if (window < 2 * profile->timing.refresh_window)
        throw Error(Errc::InvalidConfig, "window must be at least twice the refresh window");
    if (effective_window() <= 0) throw Error(Errc::InvalidConfig, "window must be positive");
    if (batch == 0) throw Error(Errc::InvalidConfig, "batch must be >= 1");
    if (parallel_banks == 0 || parallel_banks > profile->banks)
        throw Error(Errc::InvalidConfig, "parallel_banks must be 1.." + std::to_string(profile->banks));
    controller.validate();
}

TestPlan TestPlan::from_config(const KvConfig& cfg) {
    TestPlan p;
    auto profile = cfg.get_or("profile", "vendor1");
    p.profile = std::make_shared<const dram::DeviceProfile>(dram::DeviceProfile::named(profile));
    if (auto b = cfg.get("banks")) p.banks = parse_banks(*b);
    p.first = static_cast<std::uint32_t>(cfg.get_uint("first", 0));
    p.last = static_cast<std::uint32_t>(cfg.get_uint("last", p.first));
    if (auto w = cfg.get("window")) p.window = parse_duration(*w, p.profile->timing.t_refi);
    p.window_scale = cfg.get_double("window_scale", p.window_scale);
    p.sequence = cfg.get_or("sequence", p.sequence);
    p.arch = cpu::parse_arch(cfg.get_or("arch", "skylake"));
    if (auto a = cfg.get("aggressor_pattern")) p.aggressor_pattern = dram::parse_pattern(*a);
    if (auto v = cfg.get("pattern")) p.victim_pattern = dram::parse_pattern(*v);
    p.batch = static_cast<unsigned>(cfg.get_uint("batch", p.batch));
    p.parallel_banks = static_cast<unsigned>(cfg.get_uint("parallel_banks", p.parallel_banks));
    p.seed = cfg.get_uint("seed", p.seed);
    p.controller = mc::ControllerConfig::from_config(cfg);
    if (auto m = cfg.get("map")) {
        auto text = read_file(*m);
        p.map = std::make_shared<const adj::AdjacencyMap>(adj::AdjacencyMap::from_config(KvConfig::parse(text)));
    }
    return p;
}

std::vector<Pass> plan_passes(const adj::AdjacencyMap& map, std::uint32_t row, std::uint32_t dummy) {
    const auto* e = map.find(row);
    if (!e) throw Error(Errc::MissingAdjacency, "no adjacency entry for row " + to_hex(row));
    std::vector<Pass> out;
    for (int h = 0; h < 2; ++h) {
        std::vector<std::uint32_t> s;
        for (const auto& n : e->victims)
            if (adj::kind_covers(n.kind, h)) s.push_back(n.row);
        if (s.empty()) continue;
        if (s.size() > 2) throw Error(Errc::InvalidConfig, "row " + to_hex(row) + " has more than two neighbors per half");
        Pass p = s.size() == 2 ? Pass{s[0], s[1]} : Pass{s[0], dummy};
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    return out;
}

std::vector<std::vector<std::uint32_t>> make_batches(const adj::AdjacencyMap& map,
                                                      const std::vector<std::uint32_t>& rows, unsigned batch) {
    TestPlan plan;
    plan.map = std::make_shared<const adj::AdjacencyMap>(map);
    plan.batch = batch;
    std::uint32_t top = 0;
    for (const auto& [r, e] : map.entries()) {
        top = std::max(top, r);
        for (const auto& n : e.victims) top = std::max(top, n.row);
    }
    auto prof = std::make_shared<dram::DeviceProfile>();
    prof->rows_per_bank = std::bit_ceil(std::max<std::uint32_t>(top + 1, 2)) * 2;
    plan.profile = prof;
    std::vector<RowPlan> plans;
    for (auto r : rows) plans.push_back(plan_row(plan, r));
    return batches_for(plan, plans);
}

RowResult run_row_test(const TestPlan& plan, unsigned bank, std::uint32_t row) {
    auto p = plan;
    p.banks = {bank};
    p.first = row;
    p.last = row + 1;
    p.batch = 1;
    p.parallel_banks = 1;
    auto res = run_bank_test(p);
    return res.rows.at(0);
}

TestResult run_bank_test(const TestPlan& plan) {
    plan.validate();
    TestResult res;
    if (plan.first == plan.last || plan.banks.empty()) return res;

    std::vector<RowPlan> plans;
    for (auto r = plan.first; r < plan.last; ++r) plans.push_back(plan_row(plan, r));

    std::vector<BankOutcome> outcomes(plan.banks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (std::size_t i; (i = next++) < plan.banks.size();) {
            try {
                outcomes[i] = test_bank(plan, plan.banks[i], plans);
            } catch (...) {
                std::lock_guard lk(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const auto n = std::min<std::size_t>(plan.parallel_banks, plan.banks.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    for (auto& o : outcomes) {
        res.rows.insert(res.rows.end(), std::make_move_iterator(o.rows.begin()), std::make_move_iterator(o.rows.end()));
        res.checks += o.checks;
        res.passes += o.passes;
        res.simulated_time += o.time;
    }
    std::sort(res.rows.begin(), res.rows.end(),
              [](const RowResult& a, const RowResult& b) { return std::tie(a.bank, a.row) < std::tie(b.bank, b.row); });
    return res;
}

bool TestResult::all_pass() const { return failures() == 0; }

std::size_t TestResult::failures() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const RowResult& r) { return !r.pass; }));
}

std::string TestResult::to_csv() const {
    std::ostringstream os;
    os << "bank,row,pass,flip_count\n";
    for (const auto& r : rows) os << r.bank << ',' << to_hex(r.row) << ',' << (r.pass ? 1 : 0) << ',' << r.flip_count << '\n';
    return os.str();
}

std::string TestResult::summary_json(const TestPlan& plan) const {
    nlohmann::json j;
    j["profile"] = plan.profile ? plan.profile->vendor : "";
    j["banks"] = plan.banks;
    j["first_row"] = plan.first;
    j["last_row"] = plan.last;
    j["rows_tested"] = rows.size();
    j["failures"] = failures();
    j["passes"] = passes;
    j["checks"] = checks;
    j["window_ps"] = plan.effective_window();
    j["simulated_time_ps"] = simulated_time;
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& r : rows)
        if (!r.pass) fails.push_back({{"bank", r.bank}, {"row", to_hex(r.row)}, {"flip_count", r.flip_count}});
    j["failed_rows"] = fails;
    const auto bank_rows = plan.profile ? plan.profile->rows_per_bank : 0;
    const double s = projected_seconds(bank_rows, plan.window);
    const double ref = projected_seconds(kReferenceBankRows, plan.window);
    j["projection"] = {{"bank_rows", bank_rows},
                       {"bank_seconds", s},
                       {"bank_time", format_hours(s)},
                       {"reference_rows", kReferenceBankRows},
                       {"reference_seconds", ref},
                       {"reference_time", format_hours(ref)}};
    return j.dump(2);
}

double projected_seconds(std::uint64_t rows, Picos window) { return double(rows) * double(window) / kPsPerSec; }

std::string format_hours(double seconds) {
    const auto m = static_cast<long long>(std::llround(seconds / 60.0));
    return std::to_string(m / 60) + "h" + (m % 60 < 10 ? "0" : "") + std::to_string(m % 60) + "m";
}

}  // namespace rhsim::orch
