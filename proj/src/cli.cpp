#include "rhsim/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "rhsim/bus_analyzer.hpp"
#include "rhsim/cpu_model.hpp"
#include "rhsim/ddr_protocol.hpp"
#include "rhsim/dram_device.hpp"
#include "rhsim/error.hpp"
#include "rhsim/inference.hpp"
#include "rhsim/kvconfig.hpp"
#include "rhsim/orchestrator.hpp"
#include "rhsim/protocol.hpp"
#include "rhsim/testbed.hpp"

namespace rhsim::cli {

namespace {

// Flags that override keys of the --config file.
class Bindings {
  public:
    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto b = std::make_unique<Binding>();
        b->key = key;
        b->opt = app->add_option(flag, b->value, help);
        items_.push_back(std::move(b));
    }
    void config(CLI::App* app) { app->add_option("-c,--config", path_, "key = value config file")->check(CLI::ExistingFile); }

    KvConfig resolve() const {
        KvConfig cfg = path_.empty() ? KvConfig{} : KvConfig::load(path_);
        for (const auto& b : items_)
            if (b->opt->count()) cfg.set(b->key, b->value);
        return cfg;
    }

  private:
    struct Binding {
        std::string key, value;
        CLI::Option* opt = nullptr;
    };
    std::vector<std::unique_ptr<Binding>> items_;
    std::string path_;
};

void add_controller_flags(Bindings& b, CLI::App* app) {
    b.add(app, "--scrambling", "controller.scrambling", "data scrambling on/off");
    b.add(app, "--refresh-multiplier", "controller.refresh_multiplier", "refresh interval multiplier (1 to 3.5)");
}

void add_scenario_flags(Bindings& b, CLI::App* app) {
    b.add(app, "-p,--profile", "profile", "vendor1|vendor2|vendor3|synthetic:<seed>|<file>");
    b.add(app, "--bank", "bank", "bank (0-15)");
    b.add(app, "--sequence", "sequence", "hammer sequence");
    b.add(app, "--arch", "arch", "CPU microarchitecture");
    b.add(app, "--pattern", "pattern", "victim data pattern");
    b.add(app, "--aggressor-pattern", "aggressor_pattern", "aggressor data pattern (default: complement)");
    b.add(app, "--dummy", "dummy", "partner row for single-sided hammering");
    b.add(app, "--time-scale", "time_scale", "hold window compression factor");
    b.add(app, "--seed", "seed", "RNG seed");
}

void write_to(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(Errc::InvalidConfig, "cannot write " + path);
    f << text;
}

std::string ns(Picos p) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << double(p) / kPsPerNs << "ns";
    return os.str();
}

int cmd_simulate(const KvConfig& cfg, const std::string& out_path, std::ostream& out) {
    auto profile = std::make_shared<const dram::DeviceProfile>(dram::DeviceProfile::named(cfg.get_or("profile", "vendor1")));
    const auto catalog = cfg.get("catalog") ? cpu::Catalog::load(*cfg.get("catalog")) : cpu::Catalog::builtin();
    const auto seq = catalog.profile_for(cfg.get_or("sequence", "clflushopt-pair"),
                                                         cpu::parse_arch(cfg.get_or("arch", "skylake")));
    const auto row_a = static_cast<std::uint32_t>(cfg.get_uint("row_a", 0x100));
    const auto row_b = static_cast<std::uint32_t>(cfg.get_uint("row_b", 0x300));
    const Picos duration = parse_duration(cfg.get_or("duration", "1trefi"), profile->timing.t_refi);
    const auto run = sim::simulate_sequence(profile, seq, static_cast<unsigned>(cfg.get_uint("bank", 0)), row_a, row_b,
                                            duration, cfg.get_uint("seed", 1), mc::ControllerConfig::from_config(cfg));
    write_to(out_path, bus::export_csv(run.trace), out);
    return 0;
}

int cmd_analyze(const std::string& trace_path, bool straddles, const std::string& cdf_path,
                const std::string& rates_path, std::ostream& out) {
    const auto trace = bus::import_csv(read_file(trace_path));
    std::size_t acts = 0;
    for (const auto& r : trace) acts += r.cmd.kind == ddr::CommandKind::Act;
    out << "commands: " << trace.size() << "\nACTs: " << acts << '\n';
    try {
        const auto rates = bus::acts_per_trefi(trace);
        std::vector<double> v(rates.begin(), rates.end());
        const auto s = bus::summarize(v);
        out << "tREFI windows: " << s.count << "\nACTs/tREFI: median " << s.p50 << ", mean " << s.mean << ", min "
            << s.min << ", max " << s.max << '\n';
        if (!rates_path.empty()) write_to(rates_path, bus::rate_csv(rates), out);
    } catch (const Error& e) {
        if (e.code() != Errc::InsufficientRefs) throw;
        out << "ACTs/tREFI: n/a (" << e.what() << ")\n";
    }
    try {
        bus::LatencyOptions opt;
        opt.exclude_refresh_straddle = !straddles;
        const auto d = bus::act_latency_cdf(trace, opt);
        out << "ACT-to-ACT: mode " << ns(d.mode()) << ", p50 " << ns(d.percentile(50)) << ", p90 "
            << ns(d.percentile(90)) << ", p99 " << ns(d.percentile(99)) << ", mean " << ns(Picos(d.mean())) << '\n'
            << "refresh-straddling deltas " << (straddles ? "included" : "excluded") << ": "
            << d.refresh_straddles.size() << '\n';
        if (!cdf_path.empty()) write_to(cdf_path, bus::cdf_csv(d), out);
    } catch (const Error& e) {
        if (e.code() != Errc::InsufficientActs) throw;
        out << "ACT-to-ACT: n/a (" << e.what() << ")\n";
    }
    return 0;
}

int cmd_inject(const KvConfig& cfg, const std::string& flips_path, std::ostream& out) {
    const auto sc = inject::Scenario::from_config(cfg);
    auto script = cfg.all("step").empty()
                      ? inject::ProtocolScript::standard(parse_duration(cfg.get_or("hold", "15s"), sc.profile->timing.t_refi),
                                                         parse_duration(cfg.get_or("lead", "0ns"), sc.profile->timing.t_refi))
                      : inject::ProtocolScript::from_config(cfg);
    const auto rep = inject::run_protocol(script, sc);
    out << rep.summary();
    if (!flips_path.empty()) write_to(flips_path, rep.flips.to_csv(), out);
    return 0;
}

int cmd_infer(const KvConfig& cfg, const std::string& map_path, const std::string& density_path, bool verify,
              std::ostream& out, std::ostream& err) {
    const auto sc = inject::Scenario::from_config(cfg);
    const auto first = static_cast<std::uint32_t>(cfg.get_uint("first", 0));
    const auto last = static_cast<std::uint32_t>(cfg.get_uint("last", first + 16));
    infer::InferOptions opt;
    opt.thresholds.noise = cfg.get_double("noise", opt.thresholds.noise);
    opt.thresholds.purity = cfg.get_double("purity", opt.thresholds.purity);
    opt.hold = parse_duration(cfg.get_or("hold", "15s"), sc.profile->timing.t_refi);
    opt.workers = static_cast<unsigned>(cfg.get_uint("workers", 0));
    const auto res = infer::infer_range(sc, first, last, opt);
    if (res.suggested_noise) {
        std::ostringstream os;
        os << "# suggested noise threshold: " << *res.suggested_noise << '\n';
        err << os.str();
    }
    write_to(map_path, res.map.to_text(), out);
    if (!density_path.empty()) write_to(density_path, res.density_csv(), out);
    if (!verify) return 0;
    const auto diff = adj::verify_map(res.map, sc.profile->topology->to_map(first, last));
    if (diff.empty()) {
        err << "inferred map matches the profile\n";
        return 0;
    }
    err << diff.to_text();
    return 2;
}

int cmd_test(const KvConfig& cfg, const std::string& csv_path, const std::string& json_path, std::ostream& out) {
    const auto plan = orch::TestPlan::from_config(cfg);
    const auto res = orch::run_bank_test(plan);
    const double proj = orch::projected_seconds(plan.profile->rows_per_bank, plan.window);
    const double ref = orch::projected_seconds(orch::kReferenceBankRows, plan.window);
    out << "rows tested: " << res.rows.size() << "\nfailures: " << res.failures() << "\npasses run: " << res.passes
        << "\nchecks: " << res.checks << "\nprojected bank time (" << plan.profile->rows_per_bank
        << " rows): " << orch::format_hours(proj) << "\nprojected bank time (" << orch::kReferenceBankRows
        << " rows): " << orch::format_hours(ref) << '\n';
    if (!csv_path.empty()) write_to(csv_path, res.to_csv(), out);
    if (!json_path.empty()) write_to(json_path, res.summary_json(plan) + "\n", out);
    return res.all_pass() ? 0 : 2;
}

int cmd_map(const KvConfig& cfg, const std::string& verify_path, std::ostream& out) {
    const auto prof = dram::DeviceProfile::named(cfg.get_or("profile", "vendor1"));
    const auto first = static_cast<std::uint32_t>(cfg.get_uint("first", 0));
    const auto last = static_cast<std::uint32_t>(cfg.get_uint("last", first + 16));
    const auto truth = prof.topology->to_map(first, last);
    if (verify_path.empty()) {
        out << truth.to_text();
        return 0;
    }
    const auto inferred = adj::AdjacencyMap::from_config(KvConfig::load(verify_path));
    const auto diff = adj::verify_map(inferred, truth);
    if (diff.empty()) {
        out << "maps match\n";
        return 0;
    }
    out << diff.to_text();
    return 2;
}

int cmd_profiles(std::ostream& out) {
    for (const auto& n : dram::DeviceProfile::builtin_names()) {
        const auto p = dram::DeviceProfile::builtin(n);
        out << n << ": " << p.description << " (" << p.rows_per_bank << " rows x " << p.banks << " banks)\n";
    }
    return 0;
}

}  // namespace

int dispatch(int argc, char** argv) { return dispatch(argc, argv, std::cout, std::cerr); }

int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"DDR4 Rowhammer simulation toolkit"};
    app.require_subcommand(1);
    std::string out_path, flips_path, densities_path, csv_path, json_path, verify_path, cdf_path, rates_path, trace_path;
    bool straddles = false, verify = false;

    auto* simulate = app.add_subcommand("simulate", "replay a hammer sequence and emit the device trace CSV");
    Bindings sim_b;
    sim_b.config(simulate);
    sim_b.add(simulate, "-p,--profile", "profile", "device profile");
    sim_b.add(simulate, "--sequence", "sequence", "sequence from the catalog");
    sim_b.add(simulate, "--arch", "arch", "CPU microarchitecture");
    sim_b.add(simulate, "--duration", "duration", "e.g. 1trefi, 100us");
    sim_b.add(simulate, "--bank", "bank", "bank");
    sim_b.add(simulate, "--row-a", "row_a", "first row");
    sim_b.add(simulate, "--row-b", "row_b", "second row");
    sim_b.add(simulate, "--seed", "seed", "RNG seed");
    sim_b.add(simulate, "--catalog", "catalog", "sequence catalog file (default: built-in)");
    add_controller_flags(sim_b, simulate);
    simulate->add_option("-o,--out", out_path, "trace CSV (default stdout)");

    auto* analyze = app.add_subcommand("analyze", "ACT rates and latency distribution of a trace CSV");
    analyze->add_option("trace", trace_path, "trace CSV")->required()->check(CLI::ExistingFile);
    analyze->add_flag("--include-straddles", straddles, "keep ACT deltas that span a REF");
    analyze->add_option("--cdf", cdf_path, "write the latency CDF CSV");
    analyze->add_option("--rates", rates_path, "write the per-window ACT rate CSV");

    auto* inj = app.add_subcommand("inject", "run the A14 fault injection protocol");
    Bindings inj_b;
    inj_b.config(inj);
    add_scenario_flags(inj_b, inj);
    inj_b.add(inj, "-a,--aggressor", "aggressor", "aggressor row");
    inj_b.add(inj, "--hold", "hold", "A14 hold duration (wall clock)");
    inj_b.add(inj, "--lead", "lead", "hammering before the A14 press");
    add_controller_flags(inj_b, inj);
    inj->add_option("--flips", flips_path, "write the flip CSV");

    auto* inf = app.add_subcommand("infer", "survey a row range and infer its adjacency map");
    Bindings inf_b;
    inf_b.config(inf);
    add_scenario_flags(inf_b, inf);
    inf_b.add(inf, "--first", "first", "first row");
    inf_b.add(inf, "--last", "last", "one past the last row");
    inf_b.add(inf, "--noise", "noise", "noise density threshold");
    inf_b.add(inf, "--purity", "purity", "half-row support purity");
    inf_b.add(inf, "--hold", "hold", "refresh-free hammer duration per row");
    inf_b.add(inf, "--workers", "workers", "parallel surveys");
    inf->add_option("-o,--out", out_path, "map file (default stdout)");
    inf->add_option("--densities", densities_path, "write the per-row density CSV");
    inf->add_flag("--verify", verify, "compare against the profile's own layout");

    auto* test = app.add_subcommand("test", "row-by-row pass/fail test with refreshes on");
    Bindings test_b;
    test_b.config(test);
    test_b.add(test, "-p,--profile", "profile", "device profile");
    test_b.add(test, "--map", "map", "adjacency map file (default: the profile's)");
    test_b.add(test, "--banks", "banks", "bank list, e.g. 0-7");
    test_b.add(test, "--first", "first", "first row");
    test_b.add(test, "--last", "last", "one past the last row");
    test_b.add(test, "--window", "window", "per-row window");
    test_b.add(test, "--window-scale", "window_scale", "divide the window for quick runs");
    test_b.add(test, "--batch", "batch", "rows per check");
    test_b.add(test, "--parallel", "parallel_banks", "banks tested concurrently");
    test_b.add(test, "--sequence", "sequence", "hammer sequence");
    test_b.add(test, "--pattern", "pattern", "victim data pattern");
    test_b.add(test, "--seed", "seed", "RNG seed");
    add_controller_flags(test_b, test);
    test->add_option("--csv", csv_path, "write the result CSV");
    test->add_option("--json", json_path, "write the JSON summary");

    auto* map = app.add_subcommand("map", "print a profile's adjacency map or diff a map file against it");
    Bindings map_b;
    map_b.config(map);
    map_b.add(map, "-p,--profile", "profile", "device profile");
    map_b.add(map, "--first", "first", "first row");
    map_b.add(map, "--last", "last", "one past the last row");
    map->add_option("--verify", verify_path, "map file to compare")->check(CLI::ExistingFile);

    auto* profiles = app.add_subcommand("profiles", "list built-in device profiles");
    auto* truth = app.add_subcommand("truth-table", "print the DDR4 command truth table and A14 transforms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (*simulate) return cmd_simulate(sim_b.resolve(), out_path, out);
        if (*analyze) return cmd_analyze(trace_path, straddles, cdf_path, rates_path, out);
        if (*inj) return cmd_inject(inj_b.resolve(), flips_path, out);
        if (*inf) return cmd_infer(inf_b.resolve(), out_path, densities_path, verify, out, err);
        if (*test) return cmd_test(test_b.resolve(), csv_path, json_path, out);
        if (*map) return cmd_map(map_b.resolve(), verify_path, out);
        if (*profiles) return cmd_profiles(out);
        if (*truth) {
            out << ddr::format_truth_table();
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace rhsim::cli
