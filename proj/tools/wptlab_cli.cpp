// wptlab: run or validate a study described by a JSON config.
//
//   wptlab run configs/waveform.json --seed 7 --out-dir out --jobs 4
//   wptlab validate configs/mec_batch.json
//
// Exit codes: 0 success, 1 usage error, 2 config error, 3 solver failure.

#include "config_source.hpp"
#include "studies.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <chrono>
#include <cstdlib>
#include <iostream>

namespace {

using namespace wptlab;
using namespace wptlab::cli;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Prepared {
    std::string study;
    std::uint64_t seed = 0;
    RunContext ctx;
    std::function<StudyOutput(const RunContext&)> runner;
};

Prepared prepare(const ConfigFile& cfg) {
    const Node root(cfg.root, "");
    Prepared p;
    p.study = root.choice("study", "", study_names());
    p.seed = static_cast<std::uint64_t>(root.count("seed", 0, 0));
    p.ctx.model = parse_model(root.object_or_empty("model"));
    p.ctx.solver = parse_solver(root.object_or_empty("solver"));
    p.runner = prepare_study(p.study, root);
    return p;
}

void report_issue(const ConfigFile& cfg, const ConfigIssue& e) {
    std::cerr << cfg.where(e.path) << ": error: " << e.what() << '\n';
}

int resolve_jobs(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("WPTLAB_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
        std::cerr << "warning: ignoring WPTLAB_JOBS='" << env << "' (expected a positive integer)\n";
    }
    return 1;
}

int cmd_validate(const std::string& path) {
    try {
        const ConfigFile cfg = load_config(path);
        try {
            const Prepared p = prepare(cfg);
            std::cout << "ok\n";
            return 0;
        } catch (const ConfigIssue& e) {
            report_issue(cfg, e);
            return kExitConfig;
        }
    } catch (const ConfigLoadError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    }
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out_dir, int jobs) {
    std::optional<ConfigFile> cfg;
    Prepared p;
    try {
        cfg.emplace(load_config(path));
        p = prepare(*cfg);
    } catch (const ConfigLoadError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const ConfigIssue& e) {
        report_issue(*cfg, e);
        return kExitConfig;
    }
    p.ctx.seed = seed.value_or(p.seed);
    p.ctx.solver.seed = p.ctx.seed;
    p.ctx.jobs = resolve_jobs(jobs);
    p.ctx.out_dir = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(p.ctx.out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory '" << out_dir << "': " << ec.message() << '\n';
        return kExitSolver;
    }

    const auto start = std::chrono::steady_clock::now();
    StudyOutput out;
    try {
        out = p.runner(p.ctx);
    } catch (const ConfigError& e) {
        std::cerr << path << ":1: error: study '" << p.study << "': " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: study '" << p.study << "' failed: " << e.what() << '\n';
        return kExitSolver;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest;
    manifest["tool"] = "wptlab";
    manifest["study"] = p.study;
    manifest["seed"] = p.ctx.seed;
    manifest["jobs"] = p.ctx.jobs;
    manifest["config_path"] = path;
    manifest["config"] = cfg->root;
    manifest["versions"] = {{"wptlab", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"cli11", CLI11_VERSION},
                            {"compiler", __VERSION__}};
    manifest["outputs"] = out.files;
    manifest["summary"] = out.summary;
    manifest["wall_time_s"] = wall;
    std::ofstream mf(p.ctx.out_dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
    if (!mf) {
        std::cerr << "error: cannot write manifest.json\n";
        return kExitSolver;
    }
    std::cout << p.study << ": wrote";
    for (const auto& f : out.files) std::cout << ' ' << f;
    std::cout << " manifest.json to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wireless power transfer study runner"};
    app.require_subcommand(1);

    std::string run_path, validate_path, out_dir = ".";
    std::uint64_t seed_value = 0;
    int jobs = 0;

    auto* run = app.add_subcommand("run", "Run the study in a config file");
    run->add_option("config", run_path, "Study config (JSON)")->required();
    auto* seed_opt = run->add_option("--seed", seed_value, "Override the config seed");
    run->add_option("--out-dir", out_dir, "Directory for CSV and manifest output");
    run->add_option("--jobs", jobs, "Worker threads (default: WPTLAB_JOBS or 1)")->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "Check a config file without running it");
    val->add_option("config", validate_path, "Study config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help exits 0; every other usage problem maps to 1.
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (*val) return cmd_validate(validate_path);
    return cmd_run(run_path, *seed_opt ? std::optional<std::uint64_t>(seed_value) : std::nullopt, out_dir, jobs);
}
