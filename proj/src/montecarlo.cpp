#include "firlab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "firlab/errors.hpp"
#include "firlab/estimator.hpp"
#include "firlab/linalg.hpp"

namespace firlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct QuantityName {
    Quantity q;
    std::string_view name;
};

constexpr QuantityName kQuantityNames[] = {
    {Quantity::SqError, "sq_error"},
    {Quantity::SpectrumDev, "spectrum_dev"},
    {Quantity::MultiplierNorm, "multiplier_norm"},
    {Quantity::ExcessRisk, "excess_risk"},
    {Quantity::LossGap, "loss_gap"},
    {Quantity::MseVsCrlb, "mse_vs_crlb"},
    {Quantity::ToeplitzChain, "toeplitz_chain"},
};

// lhs <= rhs up to roundoff in the matrix norms
bool within(double lhs, double rhs) { return lhs <= rhs + 1e-10 * std::max(1.0, std::abs(rhs)); }

}  // namespace

std::string_view to_string(Quantity q) {
    for (const auto& entry : kQuantityNames) {
        if (entry.q == q) return entry.name;
    }
    return "unknown";
}

Quantity quantity_from_string(std::string_view name) {
    for (const auto& entry : kQuantityNames) {
        if (entry.name == name) return entry.q;
    }
    throw ConfigError("unknown quantity '" + std::string(name) + "'");
}

Quantity quantity_for(TheoremId theorem) {
    switch (theorem) {
        case TheoremId::EstimationError: return Quantity::SqError;
        case TheoremId::OracleInequality: return Quantity::LossGap;
        case TheoremId::RiskBound: return Quantity::ExcessRisk;
        case TheoremId::Spectrum: return Quantity::SpectrumDev;
        case TheoremId::Multiplier: return Quantity::MultiplierNorm;
    }
    throw ConfigError("unknown theorem");
}

BoundConfig default_bound_config(const FirSystem& system) {
    BoundConfig cfg;
    cfg.T = system.lag();
    cfg.L_x = system.input_spec().psi2_norm();
    cfg.sigma_x = std::sqrt(system.input_spec().variance());
    if (system.noise_spec()) {
        cfg.L_eps = system.noise_spec()->psi2_norm();
        cfg.sigma_eps = std::sqrt(system.noise_spec()->variance());
    } else {
        // noiseless: keep L_eps valid, the noise scale is zero
        cfg.L_eps = psi2_norm_of(Family::Gaussian, 1.0);
        cfg.sigma_eps = 0.0;
    }
    return cfg;
}

bool ExperimentConfig::wants(Quantity q) const {
    return std::find(quantities.begin(), quantities.end(), q) != quantities.end();
}

BoundConfig ExperimentConfig::bound_at(int N) const {
    BoundConfig cfg = bound;
    cfg.T = lag();
    cfg.N = N;
    return cfg;
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (N_grid.empty()) throw ConfigError("N_grid must not be empty");
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
        if (N_grid[i] < 1) throw ConfigError("N_grid entries must be positive");
        if (i > 0 && N_grid[i] <= N_grid[i - 1]) {
            throw ConfigError("N_grid must be strictly increasing");
        }
    }
    if (N_grid.size() >= (std::size_t{1} << 31)) throw ConfigError("N_grid too long");
    if (grid_points != 0 && grid_points < 4 * lag()) {
        throw ConfigError("grid_points must be 0 (default) or at least 4T");
    }
}

ChainCheck check_toeplitz_chain(const DesignMatrix& X, int grid_points) {
    const ToeplitzSplit split = toeplitz_split(X);
    const int N = split.N;
    const int T = split.T;
    const Eigen::MatrixXd& M = X.matrix();
    ChainCheck c;

    c.split_exact = (M - split.L - split.S).cwiseAbs().maxCoeff() == 0.0;

    const double s_norm = operator_norm(split.S);
    const double corner = corner_norm_bound(split);
    c.corner_ok = within(s_norm, corner);
    c.corner_margin = corner - s_norm;
    c.corner_vector_ok = within(s_norm, corner_vector_norms(split));

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(T, T);
    const double shift = static_cast<double>(N + 1 - T);
    const double dev = operator_norm(split.L.transpose() * split.L - shift * identity);
    const int grid = grid_points > 0 ? grid_points : default_grid_points(T);
    const double sup = sup_mult_poly(mult_poly(split), grid);
    c.poly_ok = within(dev, sup);
    c.poly_margin = sup - dev;

    const double lhs = operator_norm(M.transpose() * M - static_cast<double>(N) * identity);
    const double rhs = (T - 1) + dev + operator_norm(split.S.transpose() * split.S) +
                       2.0 * operator_norm(split.S.transpose() * split.L);
    c.composite_ok = within(lhs, rhs);
    c.composite_margin = rhs - lhs;
    return c;
}

double TrialRecord::value(Quantity q) const {
    switch (q) {
        case Quantity::SqError: return sq_error;
        case Quantity::SpectrumDev: return spectrum_dev;
        case Quantity::MultiplierNorm: return multiplier_norm;
        case Quantity::ExcessRisk: return excess_risk;
        case Quantity::LossGap: return loss_gap;
        case Quantity::MseVsCrlb: return crlb_trace;
        case Quantity::ToeplitzChain:
            // failure indicator, so tail_probability(.., 0.5) is the failure rate
            if (!chain) return 1.0;
            return chain->passed() ? 0.0 : 1.0;
    }
    return kNaN;
}

namespace {

TrialRecord run_one(const ExperimentConfig& config, int g, int i) {
    TrialRecord rec;
    rec.grid_index = g;
    rec.trial_id = i;
    rec.N = config.N_grid[static_cast<std::size_t>(g)];
    rec.T = config.lag();
    rec.sq_error = rec.spectrum_dev = rec.multiplier_norm = rec.multiplier_sq = kNaN;
    rec.excess_risk = rec.loss_gap = rec.crlb_trace = kNaN;

    try {
        const int N = rec.N;
        const int T = rec.T;
        const FirSystem& system = config.system;
        const std::uint64_t stream = (static_cast<std::uint64_t>(g) << 32) | static_cast<std::uint32_t>(i);
        const Trajectory traj = simulate(system, N, SeedSpec{config.master_seed, stream});
        const DesignMatrix X = build_design(traj.inputs, T, N);
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(traj.outputs.data(), N);
        const Eigen::VectorXd eps = Eigen::Map<const Eigen::VectorXd>(traj.noise.data(), N);

        const Eigen::MatrixXd cov = sample_covariance(X);
        const Eigen::VectorXd s = svd(cov).singular_values;
        rec.s_max = s(0);
        rec.s_min = s(s.size() - 1);
        if (rec.s_max == 0.0 || rec.s_min <= default_rel_tol(N, T) * rec.s_max) {
            rec.singular = true;
        }
        rec.realized_delta = std::max(std::abs(rec.s_min - 1.0), std::abs(rec.s_max - 1.0));

        const Eigen::VectorXd a_hat = least_squares(X, y);
        rec.residual_orthogonality = residual_orthogonality(X, y, a_hat);

        if (config.wants(Quantity::SpectrumDev)) {
            rec.spectrum_dev = operator_norm(cov - Eigen::MatrixXd::Identity(T, T));
        }
        if (system.regressor().is_linear() &&
            (config.wants(Quantity::SqError) || config.wants(Quantity::MseVsCrlb))) {
            rec.sq_error = (a_hat - system.regressor().a).squaredNorm();
        }
        if (config.wants(Quantity::MultiplierNorm)) {
            const Eigen::VectorXd m = X.matrix().transpose() * eps / static_cast<double>(N);
            rec.multiplier_sq = m.squaredNorm();
            rec.multiplier_norm = std::sqrt(rec.multiplier_sq);
        }
        if (config.wants(Quantity::ExcessRisk)) {
            rec.excess_risk = expected_excess_risk(X, system.noise_variances(N));
        }
        if (config.wants(Quantity::LossGap)) {
            const Eigen::VectorXd f = regressor_values(system, X);
            const Eigen::VectorXd a_min = oracle_minimizer(X, f);
            rec.loss_gap = prediction_loss(X, y, a_min) - prediction_loss(X, y, a_hat);
        }
        if (config.wants(Quantity::MseVsCrlb)) {
            const double sigma = std::sqrt(system.noise_variance_bound());
            rec.crlb_trace = sigma > 0.0 ? crlb_trace(X, sigma) : 0.0;
        }
        if (config.wants(Quantity::ToeplitzChain) && N >= 2 * T - 2) {
            rec.chain = check_toeplitz_chain(X, config.grid_points);
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

TrialBatch::TrialBatch(ExperimentConfig config, std::vector<TrialRecord> records)
    : config_(std::move(config)), records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(), [](const TrialRecord& a, const TrialRecord& b) {
        return a.grid_index != b.grid_index ? a.grid_index < b.grid_index : a.trial_id < b.trial_id;
    });
}

std::vector<double> TrialBatch::values(Quantity q, int N) const {
    if (!has(q)) throw QueryError("quantity '" + std::string(to_string(q)) + "' not in batch");
    std::vector<double> out;
    for (const auto& r : records_) {
        if (r.N != N || !r.usable()) continue;
        const double v = r.value(q);
        if (std::isfinite(v)) out.push_back(v);
    }
    return out;
}

std::vector<QuantitySummary> TrialBatch::summary(Quantity q) const {
    std::vector<QuantitySummary> out;
    for (int N : config_.N_grid) {
        const std::vector<double> v = values(q, N);
        QuantitySummary s;
        s.T = config_.lag();
        s.N = N;
        s.count = static_cast<int>(v.size());
        if (!v.empty()) {
            double sum = 0.0;
            for (double x : v) sum += x;
            s.mean = sum / v.size();
            double ss = 0.0;
            for (double x : v) ss += (x - s.mean) * (x - s.mean);
            s.std_error = v.size() > 1 ? std::sqrt(ss / (v.size() - 1) / v.size()) : 0.0;
            s.median = empirical_quantile(v, 0.5);
            s.q95 = empirical_quantile(v, 0.95);
        } else {
            s.mean = s.median = s.q95 = s.std_error = kNaN;
        }
        out.push_back(s);
    }
    return out;
}

int TrialBatch::singular_count(int N) const {
    return static_cast<int>(std::count_if(records_.begin(), records_.end(), [N](const auto& r) {
        return r.N == N && r.singular;
    }));
}

int TrialBatch::error_count(int N) const {
    return static_cast<int>(std::count_if(records_.begin(), records_.end(), [N](const auto& r) {
        return r.N == N && !r.error.empty();
    }));
}

int default_workers() {
    if (const char* env = std::getenv("FIRLAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

TrialBatch run_trials(const ExperimentConfig& config, int workers) {
    config.validate();
    if (workers <= 0) workers = default_workers();

    const std::size_t per_point = static_cast<std::size_t>(config.trials);
    const std::size_t total = per_point * config.N_grid.size();
    std::vector<TrialRecord> records(total);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
            records[k] = run_one(config, static_cast<int>(k / per_point), static_cast<int>(k % per_point));
        }
    };
    const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), total));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    return TrialBatch(config, std::move(records));
}

double empirical_quantile(std::vector<double> data, double p) {
    if (data.empty()) throw QueryError("empirical_quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile level must lie in [0,1]");
    std::sort(data.begin(), data.end());
    const double h = (data.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, data.size() - 1);
    return data[lo] + (h - static_cast<double>(lo)) * (data[hi] - data[lo]);
}

double tail_probability(std::span<const double> samples, double threshold) {
    if (samples.empty()) throw QueryError("tail_probability: no samples");
    const auto above = std::count_if(samples.begin(), samples.end(),
                                     [threshold](double v) { return v > threshold; });
    return static_cast<double>(above) / static_cast<double>(samples.size());
}

double tail_probability(const TrialBatch& batch, Quantity q, double threshold, std::optional<int> N) {
    std::vector<double> all;
    for (int n : batch.config().N_grid) {
        if (N && n != *N) continue;
        const auto v = batch.values(q, n);
        all.insert(all.end(), v.begin(), v.end());
    }
    return tail_probability(all, threshold);
}

RateFit fit_rate(std::span<const double> N, std::span<const double> values) {
    if (N.size() != values.size()) throw DimensionError("fit_rate: N and values differ in length");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < N.size(); ++i) {
        if (N[i] > 0.0 && values[i] > 0.0 && std::isfinite(values[i])) {
            lx.push_back(std::log(N[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    if (lx.size() < 3) throw QueryError("fit_rate: fewer than 3 positive points");
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw QueryError("fit_rate: all N identical");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

RateFit fit_rate(const TrialBatch& batch, Quantity q) {
    std::vector<double> ns, means;
    for (const auto& s : batch.summary(q)) {
        ns.push_back(s.N);
        means.push_back(s.mean);
    }
    return fit_rate(ns, means);
}

std::vector<PointCheck> check_theorem(const TrialBatch& batch, TheoremId theorem,
                                      std::optional<double> C, std::optional<double> eta) {
    const Quantity q = quantity_for(theorem);
    if (!batch.has(q)) {
        throw QueryError("theorem " + std::to_string(static_cast<int>(theorem)) + " needs quantity '" +
                         std::string(to_string(q)) + "'");
    }
    std::vector<PointCheck> out;
    for (int N : batch.config().N_grid) {
        PointCheck pc;
        pc.cfg = batch.config().bound_at(N);
        if (C) pc.cfg.C = *C;
        if (eta) pc.cfg.eta = *eta;
        const BoundReport report = evaluate_bound(theorem, pc.cfg);
        pc.T = pc.cfg.T;
        pc.N = N;
        pc.bound_value = report.bound_value;
        pc.min_N = report.min_N;
        pc.condition_met = report.condition_met;

        int violations = 0;
        std::vector<double> v;
        for (const auto& r : batch.records()) {
            if (r.N != N) continue;
            const double x = r.value(q);
            if (!r.usable() || !std::isfinite(x)) {
                ++pc.excluded;
                continue;
            }
            v.push_back(x);
            bool violated = x > pc.bound_value;
            if (theorem == TheoremId::RiskBound) {
                const double d = pc.cfg.delta;
                violated = violated || r.s_min < 1.0 - d || r.s_max > 1.0 + d;
            }
            if (violated) ++violations;
        }
        pc.trials = static_cast<int>(v.size());
        if (v.empty()) {
            pc.quantity_mean = pc.quantity_q95 = kNaN;
            pc.violation_freq = 1.0;
        } else {
            double sum = 0.0;
            for (double x : v) sum += x;
            pc.quantity_mean = sum / v.size();
            pc.quantity_q95 = empirical_quantile(v, 0.95);
            pc.violation_freq = static_cast<double>(violations) / v.size();
        }
        out.push_back(pc);
    }
    return out;
}

ConditionalRiskCheck check_risk_at_realized_delta(const TrialBatch& batch) {
    if (!batch.has(Quantity::ExcessRisk)) throw QueryError("batch has no excess_risk");
    const double sigma = std::sqrt(batch.config().system.noise_variance_bound());
    ConditionalRiskCheck out;
    for (const auto& r : batch.records()) {
        if (!r.usable() || !(r.realized_delta < 1.0)) continue;
        ++out.eligible;
        const double bound = risk_bound_value(r.realized_delta, r.T, r.N, sigma);
        if (bound > 0.0) out.max_ratio = std::max(out.max_ratio, r.excess_risk / bound);
        if (r.excess_risk > bound * (1.0 + 1e-12)) ++out.exceptions;
    }
    return out;
}

std::vector<bool> toeplitz_chain_check(const TrialBatch& batch) {
    if (!batch.has(Quantity::ToeplitzChain)) throw QueryError("batch has no toeplitz_chain");
    std::vector<bool> out;
    out.reserve(batch.records().size());
    for (const auto& r : batch.records()) {
        out.push_back(r.error.empty() && r.chain && r.chain->passed());
    }
    return out;
}

namespace {

double hoeffding_margin(double confidence, int n) {
    if (confidence <= 0.0 || n <= 0) return 0.0;
    return std::sqrt(std::log(1.0 / (1.0 - confidence)) / (2.0 * n));
}

}  // namespace

CalibrationResult calibrate_constant(std::span<const TrialBatch> sweep, TheoremId theorem,
                                     double eta, const CalibrationOptions& options) {
    if (!(options.confidence >= 0.0 && options.confidence < 1.0)) {
        throw ConfigError("calibration confidence must lie in [0,1)");
    }
    int points = 0;
    for (const auto& batch : sweep) {
        if (batch.config().trials < options.min_trials) {
            throw ConfigError("calibration needs at least " + std::to_string(options.min_trials) +
                              " trials per sweep point");
        }
        points += static_cast<int>(batch.config().N_grid.size());
    }
    if (points < options.min_points) {
        throw ConfigError("calibration sweep must cover at least " +
                          std::to_string(options.min_points) + " (T, N) pairs");
    }

    auto evaluate = [&](double C) {
        std::vector<PointCheck> all;
        for (const auto& batch : sweep) {
            auto pcs = check_theorem(batch, theorem, C, eta);
            all.insert(all.end(), pcs.begin(), pcs.end());
        }
        return all;
    };
    auto feasible = [&](const std::vector<PointCheck>& pcs) {
        return std::all_of(pcs.begin(), pcs.end(), [&](const PointCheck& pc) {
            return pc.trials > 0 &&
                   pc.violation_freq + hoeffding_margin(options.confidence, pc.trials) <= eta;
        });
    };

    CalibrationResult result;
    result.theorem = theorem;
    result.eta = eta;

    auto at_zero = evaluate(0.0);
    if (feasible(at_zero)) {
        result.C = 0.0;
        result.feasible = true;
        result.points = std::move(at_zero);
        return result;
    }
    auto at_max = evaluate(options.max_C);
    if (!feasible(at_max)) {
        result.C = options.max_C;
        result.feasible = false;
        result.points = std::move(at_max);
        return result;
    }

    double lo = 0.0;
    double hi = 1.0;
    while (hi < options.max_C && !feasible(evaluate(hi))) {
        lo = hi;
        hi = std::min(2.0 * hi, options.max_C);
    }
    while (hi - lo > options.rel_precision * hi) {
        const double mid = 0.5 * (lo + hi);
        (feasible(evaluate(mid)) ? hi : lo) = mid;
    }
    result.C = hi;
    result.feasible = true;
    result.points = evaluate(hi);
    return result;
}

CalibrationResult calibrate_constant(std::span<const ExperimentConfig> sweep, TheoremId theorem,
                                     double eta, const CalibrationOptions& options, int workers) {
    std::vector<TrialBatch> batches;
    batches.reserve(sweep.size());
    const Quantity q = quantity_for(theorem);
    for (ExperimentConfig cfg : sweep) {
        if (!cfg.wants(q)) cfg.quantities.push_back(q);
        batches.push_back(run_trials(cfg, workers));
    }
    return calibrate_constant(std::span<const TrialBatch>(batches), theorem, eta, options);
}

}  // namespace firlab
