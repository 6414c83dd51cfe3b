#pragma once

// Study runners for the command-line tool. Every study parses its block into a plain
// parameter struct first (so `validate` can stop there) and then executes.

#include "config_source.hpp"

#include <wptlab.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace wptlab::cli {

struct RunContext {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::filesystem::path out_dir = ".";
    SolverConfig solver;
    EhTaylorModel model;
};

struct StudyOutput {
    std::vector<std::string> files;
    json summary = json::object();
};

/// Runs body(i) for i in [0, n) on `jobs` threads with a static stride. Results must
/// be written to per-index slots so the output order never depends on scheduling.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// CSV writer with fixed formatting so identical runs give identical bytes.
class Csv {
public:
    Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path), path_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    Csv& operator<<(double v) {
        sep();
        if (std::isfinite(v)) {
            std::ostringstream s;
            s << std::setprecision(12) << v;
            out_ << s.str();
        } else {
            out_ << (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
        }
        return *this;
    }
    Csv& operator<<(long long v) {
        sep();
        out_ << v;
        return *this;
    }
    Csv& operator<<(int v) { return *this << static_cast<long long>(v); }
    Csv& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
    Csv& operator<<(const std::string& v) {
        sep();
        out_ << v;
        return *this;
    }
    Csv& operator<<(const char* v) { return *this << std::string(v); }
    /// Empty cell.
    Csv& blank() {
        sep();
        return *this;
    }
    void end_row() {
        out_ << '\n';
        first_ = true;
    }
    std::string name() const { return path_.filename().string(); }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ofstream out_;
    std::filesystem::path path_;
    bool first_ = true;
};

inline std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    return seed * 0x9E3779B97F4A7C15ull + index + 1;
}

// ---------------------------------------------------------------------------
// Shared parsers
// ---------------------------------------------------------------------------

inline EhTaylorModel parse_model(const Node& n) {
    EhTaylorModel m;
    m.n_o = static_cast<int>(n.integer("n_o", m.n_o));
    if (m.n_o != 2 && m.n_o != 4 && m.n_o != 6) throw ConfigIssue(n.child("n_o"), "field '" + n.child("n_o") + "' must be 2, 4 or 6");
    m.r_ant = n.positive("r_ant", m.r_ant);
    m.n_ideality = n.positive("n_ideality", m.n_ideality);
    m.v_t = n.positive("v_t", m.v_t);
    m.r_load = n.positive("r_load", m.r_load);
    m.i_s = n.positive("i_s", m.i_s);
    return m;
}

inline SolverConfig parse_solver(const Node& n) {
    SolverConfig c;
    c.abs_tol = n.positive("abs_tol", c.abs_tol);
    c.rel_tol = n.positive("rel_tol", c.rel_tol);
    c.max_iters = static_cast<int>(n.count("max_iters", c.max_iters));
    c.restarts = static_cast<int>(n.count("restarts", c.restarts, 0));
    return c;
}

inline std::optional<HpaModel> parse_hpa(const Node& parent, const std::string& key) {
    if (!parent.has(key)) return std::nullopt;
    const Node n = parent.object(key);
    const std::string kind = n.choice("kind", "linear", {"linear", "rapp"});
    if (kind == "linear") return HpaModel{hpa::Linear{n.positive("gain", 1.0), n.positive("e1", 1.0)}};
    return HpaModel{hpa::Rapp{n.positive("gain", 1.0), n.positive("a_s"), n.positive("beta", 1.0)}};
}

/// SISO channel over `tones` tones: "rayleigh" (i.i.d. per tone), "explicit" gains or
/// a "multipath" profile with delays in seconds.
inline ChannelResponse parse_siso_channel(const Node& n, int tones, const ToneGrid& grid, std::uint64_t seed) {
    const std::string kind = n.choice("kind", "rayleigh", {"rayleigh", "explicit", "multipath"});
    if (kind == "rayleigh") return rayleigh_iid(1, 1, grid, seed);
    if (kind == "explicit") {
        const auto g = n.complexes("gains");
        if (static_cast<int>(g.size()) != tones)
            throw ConfigIssue(n.child("gains"), "field '" + n.child("gains") + "' must list one gain per tone");
        return siso_channel(g, &grid);
    }
    MultipathProfile p;
    p.delays = n.numbers("delays");
    p.gains = n.numbers("gains");
    if (p.delays.size() != p.gains.size() || p.delays.empty())
        throw ConfigIssue(n.child("gains"), "field '" + n.child("gains") + "' must match 'delays' in length");
    for (double d : p.delays)
        if (!(d >= 0.0)) throw ConfigIssue(n.child("delays"), "field '" + n.child("delays") + "' must be >= 0");
    if (n.flag("random_phases", true)) {
        auto rng = make_rng(seed, 0x9a5e);
        std::uniform_real_distribution<double> ud(0.0, kTwoPi);
        p.phases.resize(p.paths() * static_cast<std::size_t>(tones));
        for (std::size_t l = 0; l < p.paths(); ++l) {
            const double ph = ud(rng);  // one phase per path, shared across tones
            for (int t = 0; t < tones; ++t) p.phases[static_cast<std::size_t>(t) * p.paths() + l] = ph;
        }
    }
    return response_from_multipath(p, grid, 1, 1);
}

// ---------------------------------------------------------------------------
// waveform
// ---------------------------------------------------------------------------

struct WaveformParams {
    int tones = 8;
    double power = 1e-4;
    ToneGrid grid;
    std::vector<std::string> strategies;
    std::function<ChannelResponse(std::uint64_t)> channel;
};

inline WaveformParams parse_waveform(const Node& n) {
    WaveformParams p;
    p.tones = static_cast<int>(n.count("tones", 8));
    p.power = n.positive("power");
    p.grid = ToneGrid::uniform(p.tones, n.positive("f0", 5.18e9), n.positive("delta_f", 1e6));
    p.grid.bandwidth_fw = n.positive("bandwidth", p.grid.delta_f);
    if (p.grid.bandwidth_fw > p.grid.delta_f)
        throw ConfigIssue(n.child("bandwidth"), "field '" + n.child("bandwidth") + "' must not exceed delta_f");
    const std::vector<std::string> known{"optimized", "uniform", "single_tone", "smf1", "smf3"};
    if (n.has("strategies")) {
        const json& s = n.raw("strategies");
        if (!s.is_array()) throw ConfigIssue(n.child("strategies"), "field '" + n.child("strategies") + "' must be an array");
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string path = n.child("strategies") + "[" + std::to_string(i) + "]";
            if (!s[i].is_string() || std::find(known.begin(), known.end(), s[i].get<std::string>()) == known.end())
                throw ConfigIssue(path, "field '" + path + "' must be one of optimized, uniform, single_tone, smf1, smf3");
            p.strategies.push_back(s[i].get<std::string>());
        }
    } else {
        p.strategies = known;
    }
    const Node ch = n.object_or_empty("channel");
    const int tones = p.tones;
    const ToneGrid grid = p.grid;
    // Parse eagerly so errors surface during validation.
    parse_siso_channel(ch, tones, grid, 0);
    const json ch_copy = n.has("channel") ? n.raw("channel") : json::object();
    const std::string ch_path = ch.path();
    p.channel = [ch_copy, ch_path, tones, grid](std::uint64_t seed) {
        return parse_siso_channel(Node(ch_copy, ch_path), tones, grid, seed);
    };
    return p;
}

inline StudyOutput run_waveform(const WaveformParams& p, const RunContext& ctx) {
    const ChannelResponse ch = p.channel(ctx.seed);
    StudyOutput out;
    Csv csv(ctx.out_dir / "waveform.csv", {"strategy", "tone_index", "frequency_hz", "channel_abs_ratio",
                                           "amplitude_sq_watts", "phase_rad", "vout_volts", "pdc_watts"});
    json vouts = json::object();
    for (const auto& name : p.strategies) {
        SignalSpec sig;
        if (name == "optimized") sig = optimize_allocation(ch, ctx.model, p.power, ctx.solver);
        else if (name == "uniform") sig = uniform_allocation(ch, p.power);
        else if (name == "single_tone") sig = single_tone_allocation(ch, p.power);
        else if (name == "smf1") sig = smf_allocation(ch, 1.0, p.power);
        else sig = smf_allocation(ch, 3.0, p.power);
        const double v = vout_of(ctx.model, sig, ch);
        vouts[name] = v;
        for (int t = 0; t < p.tones; ++t) {
            const cplx w = sig.weights(0, t);
            csv << name << t << ch.grid.frequency(t) << std::abs(ch.h[static_cast<std::size_t>(t)](0, 0)) << std::norm(w)
                << (std::norm(w) > 0.0 ? std::arg(w) : 0.0) << v << v * v / ctx.model.r_load;
            csv.end_row();
        }
    }
    out.files.push_back(csv.name());
    out.summary["vout_volts"] = vouts;
    return out;
}

// ---------------------------------------------------------------------------
// irs
// ---------------------------------------------------------------------------

struct IrsParams {
    Eigen::Index elements = 256;
    std::vector<Eigen::Index> group_sizes;
    std::size_t trials = 2000;
};

inline IrsParams parse_irs(const Node& n) {
    IrsParams p;
    p.elements = static_cast<Eigen::Index>(n.count("elements", 256));
    p.trials = static_cast<std::size_t>(n.count("trials", 2000));
    if (n.has("group_sizes")) {
        const auto g = n.numbers("group_sizes");
        for (std::size_t i = 0; i < g.size(); ++i) {
            const std::string path = n.child("group_sizes") + "[" + std::to_string(i) + "]";
            if (g[i] < 1 || g[i] != std::floor(g[i]) || p.elements % static_cast<Eigen::Index>(g[i]) != 0)
                throw ConfigIssue(path, "field '" + path + "' must be a positive divisor of elements");
            p.group_sizes.push_back(static_cast<Eigen::Index>(g[i]));
        }
    } else {
        for (Eigen::Index g = 1; g <= p.elements; g *= 2)
            if (p.elements % g == 0) p.group_sizes.push_back(g);
        if (p.group_sizes.back() != p.elements) p.group_sizes.push_back(p.elements);
    }
    return p;
}

inline StudyOutput run_irs(const IrsParams& p, const RunContext& ctx) {
    const auto rows = gain_study(p.elements, p.group_sizes, p.trials, ctx.seed);
    StudyOutput out;
    Csv csv(ctx.out_dir / "irs.csv", {"group_size_count", "mean_channel_power_ratio", "gain_over_single_ratio"});
    for (const auto& r : rows) {
        csv << static_cast<long long>(r.group_size) << r.mean_power << r.gain;
        csv.end_row();
        out.summary["gain_L" + std::to_string(r.group_size)] = r.gain;
    }
    out.files.push_back(csv.name());
    return out;
}

// ---------------------------------------------------------------------------
// combining
// ---------------------------------------------------------------------------

struct CombiningParams {
    std::size_t trials = 200;
    Eigen::Index tx = 2;
    std::vector<Eigen::Index> rx{2, 4};
    double power = 1e-4;
};

inline CombiningParams parse_combining(const Node& n) {
    CombiningParams p;
    p.trials = static_cast<std::size_t>(n.count("trials", 200));
    p.tx = static_cast<Eigen::Index>(n.count("tx", 2));
    p.power = n.positive("power");
    if (n.has("rx")) {
        p.rx.clear();
        for (double q : n.numbers("rx")) {
            if (q < 1 || q != std::floor(q)) throw ConfigIssue(n.child("rx"), "field '" + n.child("rx") + "' must hold positive integers");
            p.rx.push_back(static_cast<Eigen::Index>(q));
        }
    }
    return p;
}

inline StudyOutput run_combining(const CombiningParams& p, const RunContext& ctx) {
    struct Row {
        Eigen::Index q;
        double dc, rf, ub;
    };
    std::vector<std::vector<Row>> rows(p.trials);
    parallel_for(p.trials, ctx.jobs, [&](std::size_t t) {
        for (Eigen::Index q : p.rx) {
            const ChannelResponse ch = rayleigh_iid(p.tx, q, ToneGrid::uniform(1), sub_seed(ctx.seed, t * 64 + static_cast<std::size_t>(q)));
            SolverConfig cfg = ctx.solver;
            cfg.seed = sub_seed(ctx.seed, t);
            const auto dc = optimize_dc_combining(ctx.model, ch, p.power, cfg);
            const auto rf = optimize_rf_combining(ctx.model, ch, p.power, cfg);
            const auto ub = unconstrained_rf_combining(ctx.model, ch, p.power);
            rows[t].push_back({q, dc.report.p_dc, rf.report.p_dc, ub.report.p_dc});
        }
    });
    StudyOutput out;
    Csv csv(ctx.out_dir / "combining.csv",
            {"trial_index", "rx_count", "tx_count", "dc_pdc_watts", "rf_pdc_watts", "rf_unconstrained_pdc_watts"});
    std::size_t rf_wins = 0, total = 0;
    for (std::size_t t = 0; t < p.trials; ++t)
        for (const auto& r : rows[t]) {
            csv << t << static_cast<long long>(r.q) << static_cast<long long>(p.tx) << r.dc << r.rf << r.ub;
            csv.end_row();
            rf_wins += r.rf >= r.dc;
            ++total;
        }
    out.files.push_back(csv.name());
    out.summary["rf_at_least_dc_fraction"] = static_cast<double>(rf_wins) / static_cast<double>(total);
    return out;
}

// ---------------------------------------------------------------------------
// re_region
// ---------------------------------------------------------------------------

struct ReRegionParams {
    double power = 1e-4;
    double noise = 1e-5;
    cplx gain{1.0, 0.0};
    int points = 21;
    double l_max = 6.0;
    std::vector<std::string> receivers{"ts", "ps"};
    int mc_tones = 0;
    int mc_targets = 8;
    double mc_power = 1e-4;
    double mc_noise = 1e-6;
};

inline ReRegionParams parse_re_region(const Node& n) {
    ReRegionParams p;
    p.power = n.positive("power");
    p.noise = n.positive("noise");
    p.gain = n.complex_value("gain", p.gain);
    if (std::abs(p.gain) == 0.0) throw ConfigIssue(n.child("gain"), "field '" + n.child("gain") + "' must be nonzero");
    p.points = static_cast<int>(n.count("points", 21, 2));
    p.l_max = n.number("l_max", p.l_max);
    if (!(p.l_max >= 1.0)) throw ConfigIssue(n.child("l_max"), "field '" + n.child("l_max") + "' must be >= 1");
    if (n.has("multicarrier")) {
        const Node m = n.object("multicarrier");
        p.mc_tones = static_cast<int>(m.count("tones", 4));
        p.mc_targets = static_cast<int>(m.count("targets", 8, 2));
        p.mc_power = m.positive("power", p.power);
        p.mc_noise = m.positive("noise", p.noise);
    }
    return p;
}

inline StudyOutput run_re_region(const ReRegionParams& p, const RunContext& ctx) {
    StudyOutput out;
    Csv csv(ctx.out_dir / "re_region.csv", {"family", "p_real_watts", "p_imag_watts", "peak_ratio", "share_ratio",
                                             "rate_bits", "energy_watts", "on_frontier_flag"});
    std::vector<RePoint> all;
    std::vector<std::string> family;
    auto keep = [&](const std::vector<RePoint>& pts, const std::string& name) {
        for (const auto& q : pts) {
            all.push_back(q);
            family.push_back(name);
        }
    };
    keep(re_sweep_ideal(ctx.model, Family::AsymGaussian, p.power, p.gain, p.noise, SweepGrid::linspace(0.0, p.power, p.points)),
         "asym_gaussian");
    keep(re_sweep_ideal(ctx.model, Family::OnOff, p.power, p.gain, p.noise, SweepGrid::linspace(1.0, p.l_max, p.points)), "on_off");
    SweepGrid mix;
    mix.a = SweepGrid::linspace(0.0, 1.0, p.points).a;
    mix.b = SweepGrid::linspace(1.0, p.l_max, p.points).a;
    keep(re_sweep_ideal(ctx.model, Family::Mixture, p.power, p.gain, p.noise, mix), "mixture");
    const auto fractions = SweepGrid::linspace(0.0, 1.0, p.points).a;
    keep(re_sweep_receiver(ctx.model, dist::Cscg{p.power}, dist::OnOff{p.l_max, p.power}, p.gain, p.noise,
                           Receiver::TimeSwitching, fractions),
         "ts");
    keep(re_sweep_receiver(ctx.model, dist::Cscg{p.power}, dist::Cscg{p.power}, p.gain, p.noise, Receiver::PowerSplitting,
                           fractions),
         "ps");

    const auto front = pareto_frontier(all);
    auto on_front = [&](const RePoint& q) {
        for (const auto& f : front)
            if (f.rate == q.rate && f.energy == q.energy) return true;
        return false;
    };
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& q = all[i];
        csv << family[i];
        if (family[i] == "asym_gaussian") csv << q.param << p.power - q.param;
        else csv.blank().blank();
        if (family[i] == "on_off") csv << q.param;
        else if (family[i] == "mixture") csv << q.param2;
        else if (family[i] == "ts") csv << p.l_max;
        else csv.blank();
        if (family[i] == "mixture" || family[i] == "ts" || family[i] == "ps") csv << q.param;
        else csv.blank();
        csv << q.rate << q.energy << (on_front(q) ? 1 : 0);
        csv.end_row();
    }
    out.files.push_back(csv.name());
    out.summary["max_rate_bits"] = front.empty() ? 0.0 : front.front().rate;
    out.summary["max_energy_watts"] = front.empty() ? 0.0 : front.back().energy;

    if (p.mc_tones > 0) {
        const ChannelResponse ch = rayleigh_iid(1, 1, ToneGrid::uniform(p.mc_tones), ctx.seed);
        CVector h(p.mc_tones);
        for (int t = 0; t < p.mc_tones; ++t) h(t) = ch.h[static_cast<std::size_t>(t)](0, 0);
        const double e_max = multicarrier_max_energy(ctx.model, h, p.mc_power, ctx.solver);
        std::vector<double> targets;
        for (int k = 0; k < p.mc_targets; ++k) targets.push_back(e_max * k / (p.mc_targets - 1));
        const auto pts = re_multicarrier_gaussian(ctx.model, h, p.mc_noise, p.mc_power, targets, ctx.solver);
        Csv mc(ctx.out_dir / "re_multicarrier.csv", {"target_watts", "rate_bits", "energy_watts"});
        for (const auto& q : pts) {
            mc << q.target << q.rate << q.energy;
            mc.end_row();
        }
        out.files.push_back(mc.name());
    }
    return out;
}

// ---------------------------------------------------------------------------
// modulation
// ---------------------------------------------------------------------------

struct ModulationParams {
    ModulationOptions opt;
    std::string harvester = "taylor";
    int surrogate_samples = 200;
    int surrogate_epochs = 20000;
    double surrogate_lr = 0.05;
};

inline ModulationParams parse_modulation(const Node& n) {
    ModulationParams p;
    p.opt.symbols = static_cast<int>(n.count("symbols", 16, 2));
    if ((p.opt.symbols & (p.opt.symbols - 1)) != 0)
        throw ConfigIssue(n.child("symbols"), "field '" + n.child("symbols") + "' must be a power of two");
    p.opt.power = n.positive("power");
    p.opt.noise = n.positive("noise");
    p.opt.lambda = n.number("lambda", 0.0);
    if (p.opt.lambda < 0.0) throw ConfigIssue(n.child("lambda"), "field '" + n.child("lambda") + "' must be >= 0");
    p.opt.batch = static_cast<int>(n.count("batch", 256));
    p.opt.iterations = static_cast<int>(n.count("iterations", 3000));
    p.opt.learning_rate = n.positive("learning_rate", 0.01);
    p.opt.hpa = parse_hpa(n, "hpa");
    p.harvester = n.choice("harvester", "taylor", {"taylor", "surrogate"});
    const Node s = n.object_or_empty("surrogate");
    p.surrogate_samples = static_cast<int>(s.count("samples", 200, 10));
    p.surrogate_epochs = static_cast<int>(s.count("epochs", 20000));
    p.surrogate_lr = s.positive("learning_rate", 0.05);
    return p;
}

inline StudyOutput run_modulation(ModulationParams p, const RunContext& ctx) {
    p.opt.seed = ctx.seed;
    HarvesterModel model = ctx.model;
    StudyOutput out;
    if (p.harvester == "surrogate") {
        // Fit on the Taylor model's single-tone response up to 10x the average power.
        std::vector<EhSample> data;
        for (int i = 0; i < p.surrogate_samples; ++i) {
            const double pin = 10.0 * p.opt.power * (i + 1) / p.surrogate_samples;
            CVector c(1);
            c(0) = std::sqrt(pin);
            data.push_back({pin, harvest(ctx.model, ReceivedSignal::multisine(c)).p_dc});
        }
        model = fit_eh_surrogate(data, p.surrogate_epochs, p.surrogate_lr, ctx.seed);
    }
    const auto r = train_modulation(model, p.opt);
    Csv csv(ctx.out_dir / "modulation.csv", {"symbol_index", "re_volts", "im_volts", "channel_re_volts", "channel_im_volts"});
    for (std::size_t k = 0; k < r.points.size(); ++k) {
        csv << k << r.points[k].real() << r.points[k].imag() << r.channel_in[k].real() << r.channel_in[k].imag();
        csv.end_row();
    }
    out.files.push_back(csv.name());
    Csv trace(ctx.out_dir / "modulation_trace.csv", {"iteration_count", "loss_ratio"});
    for (std::size_t i = 0; i < r.loss_trace.size(); ++i) {
        trace << i + 1 << r.loss_trace[i];
        trace.end_row();
    }
    out.files.push_back(trace.name());
    out.summary["rate_bits"] = r.rate;
    out.summary["pdc_watts"] = r.p_dc;
    out.summary["symbol_error_ratio"] = r.symbol_error;
    out.summary["penalty_clipped"] = r.penalty_clipped;
    return out;
}

// ---------------------------------------------------------------------------
// mec
// ---------------------------------------------------------------------------

inline MecScenario parse_mec_scenario(const Node& n) {
    MecScenario s;
    s.deadline = n.positive("deadline");
    s.tail = n.numbers("tail");
    s.gamma = n.positive("gamma");
    s.p_dc = n.positive("p_dc");
    s.bits = n.positive("bits");
    s.bandwidth = n.positive("bandwidth");
    s.gain = n.positive("gain");
    s.noise = n.positive("noise");
    try {
        s.validate();
    } catch (const ConfigError& e) {
        // Library messages use "mec.<field>: ..."; re-anchor them to this scenario.
        std::string msg = e.what();
        const auto colon = msg.find(':');
        const std::string field = msg.substr(4, colon - 4);
        throw ConfigIssue(n.child(field), "field '" + n.child(field) + "'" + msg.substr(colon));
    }
    return s;
}

struct MecParams {
    std::vector<MecScenario> scenarios;
    std::size_t random_count = 0;
    std::size_t random_cycles = 6;
};

inline MecParams parse_mec(const Node& n) {
    MecParams p;
    if (n.has("scenarios"))
        for (const auto& s : n.objects("scenarios")) p.scenarios.push_back(parse_mec_scenario(s));
    if (n.has("random")) {
        const Node r = n.object("random");
        p.random_count = static_cast<std::size_t>(r.count("count", 100));
        p.random_cycles = static_cast<std::size_t>(r.count("cycles", 6));
    }
    if (p.scenarios.empty() && p.random_count == 0)
        throw ConfigIssue(n.path(), "missing required field '" + n.child("scenarios") + "' (or '" + n.child("random") + "')");
    return p;
}

/// Random scenarios spanning the low, medium and high local regimes and both sides of
/// the offloading threshold.
inline MecScenario random_mec_scenario(std::size_t cycles, std::uint64_t seed) {
    auto rng = make_rng(seed, 0x3ec);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MecScenario s;
    s.tail.resize(cycles);
    s.tail[0] = 1.0;
    for (std::size_t k = 1; k < cycles; ++k) s.tail[k] = s.tail[k - 1] * (0.5 + 0.5 * u(rng));
    s.deadline = 1e-6 * (0.5 + u(rng));
    s.gamma = 1e-28;
    s.bits = 2.0 + 10.0 * u(rng);
    s.bandwidth = 1e7;
    s.gain = 1e-6 * (0.2 + u(rng));
    s.noise = 1e-16;
    const auto th = local_regime_thresholds(s);
    s.p_dc = th.a * (0.8 + 1.6 * u(rng) * th.a_prime / th.a);
    return s;
}

inline StudyOutput run_mec(const MecParams& p, const RunContext& ctx) {
    std::vector<MecScenario> sc = p.scenarios;
    for (std::size_t i = 0; i < p.random_count; ++i) sc.push_back(random_mec_scenario(p.random_cycles, sub_seed(ctx.seed, i)));
    std::vector<MecPolicy> pol(sc.size());
    std::vector<LocalThresholds> th(sc.size());
    std::vector<double> a2(sc.size());
    parallel_for(sc.size(), ctx.jobs, [&](std::size_t i) {
        pol[i] = select_mode(sc[i]);
        th[i] = local_regime_thresholds(sc[i]);
        a2[i] = offload_threshold(sc[i]);
    });
    StudyOutput out;
    Csv csv(ctx.out_dir / "mec.csv", {"scenario_index", "mode", "regime", "harvested_watts", "a_watts", "a_prime_watts",
                                      "a_offload_watts", "offload_time_s", "energy_joules", "savings_joules", "frequencies_hz"});
    std::size_t counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < sc.size(); ++i) {
        std::string f;
        for (double v : pol[i].frequencies) f += (f.empty() ? "" : ";") + fmt(v);
        csv << i << mec_mode_name(pol[i].mode) << pol[i].regime << sc[i].p_dc << th[i].a << th[i].a_prime << a2[i]
            << pol[i].offload_time << pol[i].energy << pol[i].energy_savings << f;
        csv.end_row();
        ++counts[static_cast<int>(pol[i].mode)];
    }
    out.files.push_back(csv.name());
    out.summary["local_count"] = counts[0];
    out.summary["offload_count"] = counts[1];
    out.summary["infeasible_count"] = counts[2];
    return out;
}

// ---------------------------------------------------------------------------
// sensing
// ---------------------------------------------------------------------------

struct SensingParams {
    SensingScenario scenario;
    bool optimize_compression = false;
};

inline SensingParams parse_sensing(const Node& n) {
    SensingParams p;
    SensingScenario& s = p.scenario;
    s.round = n.positive("round");
    s.wpt_time = n.positive("wpt_time");
    s.power = n.positive("power");
    s.bandwidth = n.positive("bandwidth");
    s.noise = n.positive("noise");
    s.e3 = n.positive("e3");
    s.price = n.number("price");
    s.epsilon = n.positive("epsilon");
    s.max_compression = n.number("max_compression");
    for (const auto& sn : n.objects("sensors")) {
        Sensor x;
        x.utility_weight = sn.positive("utility_weight");
        x.utility_scale = sn.positive("utility_scale");
        x.gain = sn.positive("gain");
        x.sensing_rate = sn.positive("sensing_rate");
        x.sensing_cost = sn.number("sensing_cost");
        x.reward_cost = sn.number("reward_cost");
        x.cpu_freq = sn.positive("cpu_freq");
        x.capacitance = sn.positive("capacitance");
        x.compression = sn.number("compression");
        s.sensors.push_back(x);
    }
    p.optimize_compression = n.flag("optimize_compression", false);
    try {
        s.validate();
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        const auto colon = msg.find(':');
        const std::string path = msg.substr(0, colon);
        throw ConfigIssue(path, "field '" + path + "'" + msg.substr(colon));
    }
    return p;
}

inline StudyOutput run_sensing(const SensingParams& p, const RunContext& ctx) {
    SensingScenario sc = p.scenario;
    SensingPolicy pol;
    bool degenerate = false;
    try {
        if (p.optimize_compression) std::tie(sc, pol) = optimize_sensing_with_compression(sc, ctx.solver);
        else pol = optimize_sensing(sc, ctx.solver);
    } catch (const DegenerateError&) {
        degenerate = true;
        pol.sensors.resize(sc.size());
        for (std::size_t n = 0; n < sc.size(); ++n) pol.sensors[n].priority = priority(sc, n);
    }
    StudyOutput out;
    Csv csv(ctx.out_dir / "sensing.csv", {"sensor_index", "scheduled_flag", "priority_per_joule", "power_watts", "sensed_bits",
                                          "transmit_time_s", "compression_ratio"});
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& a = pol.sensors[n];
        csv << n << (a.scheduled ? 1 : 0) << priority(sc, n) << a.power << a.bits << a.time << sc.sensors[n].compression;
        csv.end_row();
    }
    out.files.push_back(csv.name());
    Csv sum(ctx.out_dir / "sensing_summary.csv", {"multiplier_per_joule", "reward_utility", "total_power_watts"});
    sum << pol.multiplier << pol.reward << pol.total_power();
    sum.end_row();
    out.files.push_back(sum.name());
    out.summary["multiplier_per_joule"] = pol.multiplier;
    out.summary["reward_utility"] = pol.reward;
    out.summary["degenerate"] = degenerate;
    return out;
}

// ---------------------------------------------------------------------------
// diversity
// ---------------------------------------------------------------------------

struct DiversityParams {
    int antennas = 2;
    std::size_t trials = 2000;
    int slots = 64;
    double power = 1e-4;
    Fading fading = Fading::Rayleigh;
    double k_factor = 0.0;
};

inline DiversityParams parse_diversity(const Node& n) {
    DiversityParams p;
    p.antennas = static_cast<int>(n.count("antennas", 2, 2));
    p.trials = static_cast<std::size_t>(n.count("trials", 2000, 2));
    p.slots = static_cast<int>(n.count("slots", 64));
    p.power = n.positive("power");
    p.fading = n.choice("fading", "rayleigh", {"rayleigh", "rician"}) == "rician" ? Fading::Rician : Fading::Rayleigh;
    p.k_factor = n.number("k_factor", 0.0);
    if (p.k_factor < 0.0) throw ConfigIssue(n.child("k_factor"), "field '" + n.child("k_factor") + "' must be >= 0");
    return p;
}

inline StudyOutput run_diversity(const DiversityParams& p, const RunContext& ctx) {
    const auto r = transmit_diversity_eval(ctx.model, p.antennas, p.trials, p.slots, p.power, ctx.seed, p.fading, p.k_factor);
    StudyOutput out;
    Csv csv(ctx.out_dir / "diversity.csv", {"trial_index", "vout_diversity_volts", "vout_single_volts"});
    for (std::size_t t = 0; t < p.trials; ++t) {
        csv << t << r.vout_td[t] << r.vout_single[t];
        csv.end_row();
    }
    out.files.push_back(csv.name());
    out.summary["mean_vout_diversity_volts"] = r.mean_vout_td;
    out.summary["mean_vout_single_volts"] = r.mean_vout_single;
    out.summary["bootstrap_lower_99_volts"] = bootstrap_mean_diff_lower(r.vout_td, r.vout_single, 0.99, 2000, ctx.seed);
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& study_names() {
    static const std::vector<std::string> names{"waveform", "irs", "combining", "re_region",
                                                "modulation", "mec", "sensing", "diversity"};
    return names;
}

/// Parses the study block; returns a runner bound to the parsed parameters.
inline std::function<StudyOutput(const RunContext&)> prepare_study(const std::string& study, const Node& root) {
    const Node n = root.object(study);
    if (study == "waveform") return [p = parse_waveform(n)](const RunContext& c) { return run_waveform(p, c); };
    if (study == "irs") return [p = parse_irs(n)](const RunContext& c) { return run_irs(p, c); };
    if (study == "combining") return [p = parse_combining(n)](const RunContext& c) { return run_combining(p, c); };
    if (study == "re_region") return [p = parse_re_region(n)](const RunContext& c) { return run_re_region(p, c); };
    if (study == "modulation") return [p = parse_modulation(n)](const RunContext& c) { return run_modulation(p, c); };
    if (study == "mec") return [p = parse_mec(n)](const RunContext& c) { return run_mec(p, c); };
    if (study == "sensing") return [p = parse_sensing(n)](const RunContext& c) { return run_sensing(p, c); };
    return [p = parse_diversity(n)](const RunContext& c) { return run_diversity(p, c); };
}

}  // namespace wptlab::cli
