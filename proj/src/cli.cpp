#include "firlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "firlab/bounds.hpp"
#include "firlab/config.hpp"
#include "firlab/csv.hpp"
#include "firlab/estimator.hpp"
#include "firlab/montecarlo.hpp"

namespace firlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

struct CommonOptions {
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    int workers = 0;
    int trials = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* trials_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOptions& c) {
    sub->add_option("--config", c.config, "JSON experiment configuration (or a manifest.json)")
        ->required();
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    c.seed_opt = sub->add_option("--seed", c.seed, "override master_seed");
    c.workers_opt = sub->add_option("--workers", c.workers, "worker threads (default FIRLAB_WORKERS)");
    c.trials_opt = sub->add_option("--trials", c.trials, "override trials per grid point");
}

/// State shared by all subcommands once the config is loaded.
class Session {
public:
    Session(const CommonOptions& c, std::string command) : opts_(c) {
        ConfigOverrides o;
        if (c.seed_opt->count()) o.seed = c.seed;
        if (c.trials_opt->count()) o.trials = c.trials;
        run = load_config(c.config, o);
        if (c.workers_opt->count() && c.workers < 1) throw ConfigError("--workers must be at least 1");
        workers = c.workers_opt->count() ? c.workers : default_workers();
        command_ = {{"name", std::move(command)}};
        fs::create_directories(c.out);
    }

    RunConfig run;
    int workers = 1;

    void note(const std::string& key, json value) { command_[key] = std::move(value); }

    std::ofstream open(const std::string& name) {
        const fs::path path = fs::path(opts_.out) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        outputs_.push_back(name);
        return f;
    }

    void write_manifest() {
        char stamp[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        const json manifest = {
            {"tool", "firlab"},
            {"version", std::string(kToolVersion)},
            {"command", command_},
            {"config_path", opts_.config},
            {"timestamp", stamp},
            {"resolved_config", run.resolved},
            {"outputs", outputs_},
        };
        std::ofstream f(fs::path(opts_.out) / "manifest.json", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write manifest.json");
        f << manifest.dump(2) << '\n';
    }

private:
    const CommonOptions& opts_;
    json command_;
    std::vector<std::string> outputs_;
};

void write_trials(std::ostream& f, const std::vector<TrialBatch>& batches) {
    csv::write_row(f, {"T", "N", "trial", "singular", "failed", "sq_error", "spectrum_dev", "s_min",
                       "s_max", "realized_delta", "multiplier_norm", "excess_risk", "loss_gap",
                       "crlb_trace", "residual_orthogonality"});
    for (const auto& batch : batches) {
        for (const auto& r : batch.records()) {
            csv::write_row(f, {csv::format(r.T), csv::format(r.N), csv::format(r.trial_id),
                               csv::format(r.singular), csv::format(!r.error.empty()),
                               csv::format(r.sq_error), csv::format(r.spectrum_dev),
                               csv::format(r.s_min), csv::format(r.s_max),
                               csv::format(r.realized_delta), csv::format(r.multiplier_norm),
                               csv::format(r.excess_risk), csv::format(r.loss_gap),
                               csv::format(r.crlb_trace), csv::format(r.residual_orthogonality)});
        }
    }
}

std::vector<TrialBatch> run_sweep(Session& s) {
    std::vector<TrialBatch> out;
    for (const auto& cfg : s.run.sweep) out.push_back(run_trials(cfg, s.workers));
    return out;
}

// Trajectory for the first lag at the largest N, using the streams of trial 0.
Trajectory reference_trajectory(const ExperimentConfig& cfg) {
    const std::size_t g = cfg.N_grid.size() - 1;
    const SeedSpec seed{cfg.master_seed, static_cast<std::uint64_t>(g) << 32};
    return simulate(cfg.system, cfg.N_grid[g], seed);
}

int cmd_simulate(Session& s) {
    const ExperimentConfig& cfg = s.run.sweep.front();
    const Trajectory traj = reference_trajectory(cfg);
    const int T = cfg.lag();
    auto f = s.open("trajectory.csv");
    csv::write_row(f, {"t", "x", "y", "eps"});
    for (int t = 1; t <= traj.N(); ++t) {
        const auto r = static_cast<std::size_t>(t - 1);
        csv::write_row(f, {csv::format(t), csv::format(traj.inputs[r + static_cast<std::size_t>(T) - 1]),
                           csv::format(traj.outputs[r]), csv::format(traj.noise[r])});
    }
    return kExitOk;
}

int cmd_estimate(Session& s) {
    const ExperimentConfig& cfg = s.run.sweep.front();
    const Trajectory traj = reference_trajectory(cfg);
    const int T = cfg.lag();
    const int N = traj.N();
    const DesignMatrix X = build_design(traj.inputs, T, N);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(traj.outputs.data(), N);
    const Eigen::VectorXd eps = Eigen::Map<const Eigen::VectorXd>(traj.noise.data(), N);
    const Regressor& f_true = cfg.system.regressor();
    std::optional<Eigen::VectorXd> a_true;
    if (f_true.is_linear()) a_true = f_true.a;
    const EstimateReport rep = estimate(X, y, a_true, eps);

    const double nan = std::nan("");
    auto e = s.open("estimate.csv");
    csv::write_row(e, {"T", "N", "loss", "sq_error", "multiplier_norm", "s_min", "s_max",
                       "residual_orthogonality", "singular"});
    csv::write_row(e, {csv::format(T), csv::format(N), csv::format(rep.loss_value),
                       csv::format(rep.sq_error.value_or(nan)),
                       csv::format(rep.multiplier_norm.value_or(nan)), csv::format(rep.s_min),
                       csv::format(rep.s_max), csv::format(rep.residual_orthogonality),
                       csv::format(rep.singular)});
    auto c = s.open("coefficients.csv");
    csv::write_row(c, {"k", "a", "a_hat"});
    for (int k = 0; k < T; ++k) {
        csv::write_row(c, {csv::format(k + 1), csv::format(f_true.a(k)), csv::format(rep.a_hat(k))});
    }
    return kExitOk;
}

struct TheoremOptions {
    int theorem = 0;
    std::string calibration;
    double C = 0.0;
    double eta = 0.0;
    CLI::Option* C_opt = nullptr;
    CLI::Option* eta_opt = nullptr;
};

// Applies --calibration, --C and --eta to every sweep entry and the resolved config.
void apply_bound_overrides(Session& s, const TheoremOptions& t, TheoremId theorem) {
    std::optional<double> C;
    std::optional<double> eta;
    if (!t.calibration.empty()) {
        std::ifstream in(t.calibration);
        if (!in) throw ConfigFileError(t.calibration + ": cannot open calibration file");
        json cal;
        try {
            cal = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigFileError(t.calibration + ": " + e.what());
        }
        if (!cal.contains("theorem") || !cal.contains("C") || !cal.contains("eta")) {
            throw ConfigFileError(t.calibration + ": expected keys theorem, C, eta");
        }
        if (cal.at("theorem").get<int>() != static_cast<int>(theorem)) {
            throw ConfigFileError(t.calibration + ": calibrated for theorem " +
                                  std::to_string(cal.at("theorem").get<int>()));
        }
        C = cal.at("C").get<double>();
        eta = cal.at("eta").get<double>();
    }
    if (t.C_opt->count()) C = t.C;
    if (t.eta_opt->count()) eta = t.eta;
    for (auto& cfg : s.run.sweep) {
        if (C) cfg.bound.C = *C;
        if (eta) cfg.bound.eta = *eta;
        for (int N : cfg.N_grid) validate(cfg.bound_at(N), theorem);
    }
    if (C) s.run.resolved["bound"]["C"] = *C;
    if (eta) s.run.resolved["bound"]["eta"] = *eta;
}

int cmd_verify(Session& s, const TheoremOptions& t) {
    const TheoremId theorem = theorem_from_int(t.theorem);
    s.note("theorem", t.theorem);
    apply_bound_overrides(s, t, theorem);
    require_quantity(s.run, quantity_for(theorem));
    const auto batches = run_sweep(s);

    bool pass = true;
    auto f = s.open("summary.csv");
    csv::write_row(f, {"T", "N", "trials", "quantity_mean", "quantity_q95", "bound_value",
                       "violation_freq", "eta", "delta", "C"});
    for (const auto& batch : batches) {
        for (const PointCheck& pc : check_theorem(batch, theorem)) {
            if (pc.violation_freq > pc.cfg.eta) pass = false;
            csv::write_row(f, {csv::format(pc.T), csv::format(pc.N), csv::format(pc.trials),
                               csv::format(pc.quantity_mean), csv::format(pc.quantity_q95),
                               csv::format(pc.bound_value), csv::format(pc.violation_freq),
                               csv::format(pc.cfg.eta), csv::format(pc.cfg.delta),
                               csv::format(pc.cfg.C)});
        }
    }
    auto tr = s.open("trials.csv");
    write_trials(tr, batches);
    return pass ? kExitOk : kExitFailed;
}

int cmd_rate(Session& s, const std::string& quantity) {
    const Quantity q = quantity_from_string(quantity);
    if (q == Quantity::ToeplitzChain) throw ConfigError("toeplitz_chain has no convergence rate");
    s.note("quantity", quantity);
    require_quantity(s.run, q);
    for (const auto& cfg : s.run.sweep) {
        if (cfg.N_grid.size() < 3) throw ConfigError("rate fits need at least 3 values in N_grid");
    }
    const auto batches = run_sweep(s);

    auto f = s.open("rate.csv");
    csv::write_row(f, {"quantity", "slope", "intercept", "r_squared"});
    for (const auto& batch : batches) {
        const RateFit fit = fit_rate(batch, q);
        csv::write_row(f, {std::string(to_string(q)), csv::format(fit.slope),
                           csv::format(fit.intercept), csv::format(fit.r_squared)});
    }
    auto p = s.open("rate_points.csv");
    csv::write_row(p, {"T", "N", "count", "mean", "median", "q95", "std_error"});
    for (const auto& batch : batches) {
        for (const QuantitySummary& qs : batch.summary(q)) {
            csv::write_row(p, {csv::format(qs.T), csv::format(qs.N), csv::format(qs.count),
                               csv::format(qs.mean), csv::format(qs.median), csv::format(qs.q95),
                               csv::format(qs.std_error)});
        }
    }
    auto tr = s.open("trials.csv");
    write_trials(tr, batches);
    return kExitOk;
}

int cmd_crlb(Session& s) {
    for (const auto& cfg : s.run.sweep) {
        if (!cfg.system.regressor().is_linear()) throw ConfigError("crlb needs a linear regressor");
        if (!cfg.system.noise_spec()) throw ConfigError("crlb needs a noisy system");
    }
    require_quantity(s.run, Quantity::SqError);
    require_quantity(s.run, Quantity::MseVsCrlb);
    const auto batches = run_sweep(s);

    auto f = s.open("efficiency.csv");
    csv::write_row(f, {"N", "T", "mse", "crlb", "ratio"});
    for (const auto& batch : batches) {
        const auto mse = batch.summary(Quantity::SqError);
        const auto bound = batch.summary(Quantity::MseVsCrlb);
        for (std::size_t i = 0; i < mse.size(); ++i) {
            csv::write_row(f, {csv::format(mse[i].N), csv::format(mse[i].T), csv::format(mse[i].mean),
                               csv::format(bound[i].mean),
                               csv::format(mse[i].mean / bound[i].mean)});
        }
    }
    auto tr = s.open("trials.csv");
    write_trials(tr, batches);
    return kExitOk;
}

int cmd_toeplitz(Session& s) {
    require_quantity(s.run, Quantity::ToeplitzChain);
    const auto batches = run_sweep(s);

    bool all = true;
    auto f = s.open("chain.csv");
    csv::write_row(f, {"T", "N", "trial", "supported", "split_exact", "corner_ok", "poly_ok",
                       "composite_ok", "corner_vector_ok", "corner_margin", "poly_margin",
                       "composite_margin", "pass"});
    const double nan = std::nan("");
    for (const auto& batch : batches) {
        for (const auto& r : batch.records()) {
            const ChainCheck c = r.chain.value_or(ChainCheck{});
            const bool pass = r.error.empty() && r.chain && c.passed();
            all = all && pass;
            const bool have = r.chain.has_value();
            csv::write_row(f, {csv::format(r.T), csv::format(r.N), csv::format(r.trial_id),
                               csv::format(have), csv::format(c.split_exact),
                               csv::format(c.corner_ok), csv::format(c.poly_ok),
                               csv::format(c.composite_ok), csv::format(c.corner_vector_ok),
                               csv::format(have ? c.corner_margin : nan),
                               csv::format(have ? c.poly_margin : nan),
                               csv::format(have ? c.composite_margin : nan), csv::format(pass)});
        }
    }
    return all ? kExitOk : kExitFailed;
}

int cmd_calibrate(Session& s, const TheoremOptions& t) {
    const TheoremId theorem = theorem_from_int(t.theorem);
    s.note("theorem", t.theorem);
    if (t.eta_opt->count()) {
        for (auto& cfg : s.run.sweep) cfg.bound.eta = t.eta;
        s.run.resolved["bound"]["eta"] = t.eta;
    }
    const double eta = s.run.sweep.front().bound.eta;
    for (const auto& cfg : s.run.sweep) {
        for (int N : cfg.N_grid) validate(cfg.bound_at(N), theorem);
    }
    require_quantity(s.run, quantity_for(theorem));
    const CalibrationResult res = calibrate_constant(std::span<const ExperimentConfig>(s.run.sweep),
                                                     theorem, eta, s.run.calibration, s.workers);

    const json out = {{"theorem", static_cast<int>(theorem)},
                      {"eta", res.eta},
                      {"C", res.C},
                      {"feasible", res.feasible},
                      {"confidence", s.run.calibration.confidence}};
    auto j = s.open("calibration.json");
    j << out.dump(2) << '\n';
    auto f = s.open("calibration.csv");
    csv::write_row(f, {"T", "N", "trials", "bound_value", "violation_freq", "eta", "C"});
    for (const PointCheck& pc : res.points) {
        csv::write_row(f, {csv::format(pc.T), csv::format(pc.N), csv::format(pc.trials),
                           csv::format(pc.bound_value), csv::format(pc.violation_freq),
                           csv::format(pc.cfg.eta), csv::format(pc.cfg.C)});
    }
    return res.feasible ? kExitOk : kExitFailed;
}

int cmd_bounds(Session& s, const TheoremOptions& t) {
    const TheoremId theorem = theorem_from_int(t.theorem);
    s.note("theorem", t.theorem);
    apply_bound_overrides(s, t, theorem);
    auto f = s.open("bounds.csv");
    csv::write_row(f, {"theorem", "T", "N", "bound_value", "min_N", "condition_met", "eta", "delta",
                       "C"});
    for (const auto& cfg : s.run.sweep) {
        for (int N : cfg.N_grid) {
            const BoundConfig b = cfg.bound_at(N);
            const BoundReport r = evaluate_bound(theorem, b);
            csv::write_row(f, {csv::format(t.theorem), csv::format(b.T), csv::format(N),
                               csv::format(r.bound_value), csv::format(r.min_N),
                               csv::format(r.condition_met), csv::format(b.eta),
                               csv::format(b.delta), csv::format(b.C)});
        }
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"firlab: least squares FIR identification experiments", "firlab"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CommonOptions common;
    TheoremOptions thm;
    std::string quantity = "sq_error";

    auto* simulate_cmd = app.add_subcommand("simulate", "write one trajectory (first T, largest N)");
    auto* estimate_cmd = app.add_subcommand("estimate", "least squares on one trajectory");
    auto* verify_cmd = app.add_subcommand("verify", "Monte Carlo check of a theorem's bound");
    auto* rate_cmd = app.add_subcommand("rate", "log-log convergence rate of a quantity");
    auto* crlb_cmd = app.add_subcommand("crlb", "mean squared error against the Cramer-Rao bound");
    auto* toeplitz_cmd = app.add_subcommand("toeplitz", "per-trial Toeplitz decomposition checks");
    auto* calibrate_cmd = app.add_subcommand("calibrate", "smallest constant C meeting eta");
    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate a bound formula on the grid");

    for (auto* sub : app.get_subcommands({})) add_common(sub, common);
    for (auto* sub : {verify_cmd, calibrate_cmd, bounds_cmd}) {
        sub->add_option("--theorem", thm.theorem, "theorem id")->required()->check(CLI::Range(1, 5));
        thm.eta_opt = sub->add_option("--eta", thm.eta, "override bound.eta");
    }
    for (auto* sub : {verify_cmd, bounds_cmd}) {
        sub->add_option("--calibration", thm.calibration, "calibration.json from `calibrate`");
        thm.C_opt = sub->add_option("--C", thm.C, "override bound.C");
    }
    rate_cmd->add_option("--quantity", quantity, "quantity to fit")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    // --eta and --C belong to whichever subcommand was parsed
    thm.eta_opt = chosen->get_option_no_throw("--eta");
    thm.C_opt = chosen->get_option_no_throw("--C");
    for (auto* sub : app.get_subcommands({})) {
        if (sub == chosen) {
            common.seed_opt = sub->get_option("--seed");
            common.workers_opt = sub->get_option("--workers");
            common.trials_opt = sub->get_option("--trials");
        }
    }

    try {
        Session s(common, chosen->get_name());
        int code = kExitOk;
        if (chosen == simulate_cmd) code = cmd_simulate(s);
        else if (chosen == estimate_cmd) code = cmd_estimate(s);
        else if (chosen == verify_cmd) code = cmd_verify(s, thm);
        else if (chosen == rate_cmd) code = cmd_rate(s, quantity);
        else if (chosen == crlb_cmd) code = cmd_crlb(s);
        else if (chosen == toeplitz_cmd) code = cmd_toeplitz(s);
        else if (chosen == calibrate_cmd) code = cmd_calibrate(s, thm);
        else code = cmd_bounds(s, thm);
        s.write_manifest();
        return code;
    } catch (const ConfigError& e) {
        err << "firlab: " << e.what() << '\n';
        return kExitConfig;
    } catch (const QueryError& e) {
        err << "firlab: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "firlab: error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace firlab
