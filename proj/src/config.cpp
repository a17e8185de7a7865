#include "firlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace firlab {

using nlohmann::json;

namespace {

struct Source {
    const std::string& text;
    const std::string& name;
};

std::string location(const Source& src, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < src.text.size(); ++i) {
        if (src.text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return src.name + ":" + std::to_string(line) + ":" + std::to_string(col);
}

// Best effort: the first occurrence of "key" in the raw text.
[[noreturn]] void fail(const Source& src, const std::string& key, const std::string& msg) {
    std::size_t byte = 0;
    if (!key.empty()) {
        const auto pos = src.text.find("\"" + key + "\"");
        if (pos != std::string::npos) byte = pos;
    }
    const std::string where = key.empty() || byte == 0 ? src.name + ":1:1" : location(src, byte);
    throw ConfigFileError(where + ": " + (key.empty() ? "" : "'" + key + "': ") + msg);
}

double number(const Source& src, const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(src, key, "expected a number");
    return v.get<double>();
}

int integer(const Source& src, const json& obj, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(src, key, "expected an integer");
    return v.get<int>();
}

std::vector<int> int_list(const Source& src, const json& v, const std::string& key) {
    if (!v.is_array() || v.empty()) fail(src, key, "expected a non-empty array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) fail(src, key, "expected integers");
        out.push_back(e.get<int>());
    }
    return out;
}

std::optional<DistributionSpec> distribution(const Source& src, const json& root,
                                             const std::string& key, bool allow_none) {
    if (!root.contains(key)) return DistributionSpec::gaussian(1.0);
    const json& d = root.at(key);
    if (d.is_null()) {
        if (!allow_none) fail(src, key, "must not be null");
        return std::nullopt;
    }
    if (!d.is_object()) fail(src, key, "expected an object");
    const std::string family = d.value("family", std::string("gaussian"));
    if (family == "none") {
        if (!allow_none) fail(src, key, "family 'none' is only valid for noise");
        return std::nullopt;
    }
    try {
        std::vector<double> scales;
        if (d.contains("per_index_scale")) {
            if (!d.at("per_index_scale").is_array()) fail(src, "per_index_scale", "expected an array");
            for (const auto& s : d.at("per_index_scale")) {
                if (!s.is_number()) fail(src, "per_index_scale", "expected numbers");
                scales.push_back(s.get<double>());
            }
        }
        double variance = number(src, d, "variance", 1.0);
        if (family_from_string(family) == Family::ScaledGaussianHeteroNoise && !d.contains("variance") &&
            !scales.empty()) {
            const double m = *std::max_element(scales.begin(), scales.end());
            variance = m * m;
        }
        return DistributionSpec(family_from_string(family), variance, std::move(scales));
    } catch (const ConfigFileError&) {
        throw;
    } catch (const ConfigError& e) {
        fail(src, key, e.what());
    }
}

Eigen::VectorXd parameter_vector(const Source& src, const json& reg, int T) {
    const json a = reg.value("a", json("geometric"));
    Eigen::VectorXd out(T);
    if (a.is_array()) {
        if (static_cast<int>(a.size()) != T) {
            fail(src, "a", "has " + std::to_string(a.size()) + " entries but T = " + std::to_string(T));
        }
        for (int k = 0; k < T; ++k) {
            if (!a[static_cast<std::size_t>(k)].is_number()) fail(src, "a", "expected numbers");
            out(k) = a[static_cast<std::size_t>(k)].get<double>();
        }
        return out;
    }
    if (!a.is_string()) fail(src, "a", "expected an array or one of \"ones\", \"geometric\"");
    const std::string rule = a.get<std::string>();
    if (rule == "ones") return Eigen::VectorXd::Ones(T);
    if (rule == "geometric") {
        const double decay = number(src, reg, "decay", 0.5);
        for (int k = 0; k < T; ++k) out(k) = std::pow(decay, k);
        return out;
    }
    fail(src, "a", "unknown rule '" + rule + "'");
}

json spec_json(const std::optional<DistributionSpec>& spec) {
    if (!spec) return json(nullptr);
    json j = {{"family", std::string(to_string(spec->family()))}, {"variance", spec->variance()}};
    if (!spec->per_index_scale().empty()) j["per_index_scale"] = spec->per_index_scale();
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source,
                       const ConfigOverrides& overrides) {
    const Source src{text, source};
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigFileError(location(src, e.byte > 0 ? e.byte - 1 : 0) + ": malformed JSON: " + e.what());
    }
    if (root.is_object() && root.contains("resolved_config")) root = root.at("resolved_config");
    if (!root.is_object()) fail(src, "", "top level must be a JSON object");

    static const char* kKnown[] = {"T", "T_grid", "regressor", "input", "noise", "N_grid", "N",
                                   "trials", "master_seed", "bound", "quantities", "grid_points",
                                   "calibration"};
    for (const auto& [key, _] : root.items()) {
        if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
            fail(src, key, "unknown configuration key");
        }
    }

    std::vector<int> T_grid;
    if (root.contains("T_grid")) {
        if (root.contains("T")) fail(src, "T_grid", "give either T or T_grid, not both");
        T_grid = int_list(src, root.at("T_grid"), "T_grid");
    } else {
        T_grid = {integer(src, root, "T", 1)};
    }
    for (int T : T_grid) {
        if (T < 1) fail(src, root.contains("T_grid") ? "T_grid" : "T", "lag must be at least 1");
    }

    std::vector<int> N_grid;
    if (root.contains("N_grid")) {
        if (root.contains("N")) fail(src, "N_grid", "give either N or N_grid, not both");
        N_grid = int_list(src, root.at("N_grid"), "N_grid");
    } else if (root.contains("N")) {
        N_grid = {integer(src, root, "N", 0)};
    } else {
        fail(src, "", "missing 'N_grid' (or 'N')");
    }

    json reg = root.value("regressor", json::object());
    if (!reg.is_object()) fail(src, "regressor", "expected an object");
    RegressorKind kind;
    try {
        kind = regressor_kind_from_string(reg.value("kind", std::string("linear")));
    } catch (const ConfigError& e) {
        fail(src, "kind", e.what());
    }
    const double beta = number(src, reg, "beta", kind == RegressorKind::LinearQuadratic ? 0.1 : 0.0);

    const auto input = distribution(src, root, "input", false);
    const auto noise = distribution(src, root, "noise", true);

    const int trials = overrides.trials.value_or(integer(src, root, "trials", 1000));
    std::uint64_t seed = 0;
    if (root.contains("master_seed")) {
        const json& s = root.at("master_seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            fail(src, "master_seed", "expected a nonnegative integer");
        }
        seed = s.get<std::uint64_t>();
    }
    if (overrides.seed) seed = *overrides.seed;

    std::vector<Quantity> quantities;
    if (root.contains("quantities")) {
        if (!root.at("quantities").is_array()) fail(src, "quantities", "expected an array");
        for (const auto& q : root.at("quantities")) {
            if (!q.is_string()) fail(src, "quantities", "expected strings");
            try {
                const Quantity parsed = quantity_from_string(q.get<std::string>());
                if (std::find(quantities.begin(), quantities.end(), parsed) == quantities.end()) {
                    quantities.push_back(parsed);
                }
            } catch (const ConfigError& e) {
                fail(src, "quantities", e.what());
            }
        }
    }
    const int grid_points = integer(src, root, "grid_points", 0);

    const json bound = root.value("bound", json::object());
    if (!bound.is_object()) fail(src, "bound", "expected an object");

    RunConfig run;
    const json cal = root.value("calibration", json::object());
    if (!cal.is_object()) fail(src, "calibration", "expected an object");
    CalibrationOptions& opt = run.calibration;
    opt.confidence = number(src, cal, "confidence", opt.confidence);
    opt.max_C = number(src, cal, "max_C", opt.max_C);
    opt.rel_precision = number(src, cal, "rel_precision", opt.rel_precision);
    opt.min_points = integer(src, cal, "min_points", opt.min_points);
    opt.min_trials = integer(src, cal, "min_trials", opt.min_trials);
    if (!(opt.confidence >= 0.0 && opt.confidence < 1.0)) fail(src, "confidence", "must lie in [0,1)");
    if (!(opt.max_C > 0.0)) fail(src, "max_C", "must be positive");
    if (!(opt.rel_precision > 0.0 && opt.rel_precision < 1.0)) {
        fail(src, "rel_precision", "must lie in (0,1)");
    }
    if (opt.min_points < 1 || opt.min_trials < 1) fail(src, "calibration", "minimums must be positive");

    json resolved_bound;
    for (int T : T_grid) {
        Regressor f{kind, parameter_vector(src, reg, T), beta};
        std::optional<FirSystem> system;
        try {
            system.emplace(std::move(f), *input, noise);
        } catch (const ConfigError& e) {
            fail(src, "regressor", e.what());
        }
        BoundConfig b = default_bound_config(*system);
        b.delta = number(src, bound, "delta", b.delta);
        b.eta = number(src, bound, "eta", b.eta);
        b.C = number(src, bound, "C", b.C);
        b.L_x = number(src, bound, "L_x", b.L_x);
        b.L_eps = number(src, bound, "L_eps", b.L_eps);
        b.sigma_eps = number(src, bound, "sigma_eps", b.sigma_eps);
        b.sigma_x = number(src, bound, "sigma_x", b.sigma_x);
        if (!(b.delta >= 0.0 && b.delta < 1.0)) fail(src, "delta", "must lie in [0,1)");
        if (!(b.eta > 0.0 && b.eta < 1.0)) fail(src, "eta", "must lie in (0,1)");
        if (!(b.C >= 0.0)) fail(src, "C", "must be nonnegative");
        if (!(b.L_x > 0.0) || !(b.L_eps > 0.0)) fail(src, "bound", "L_x and L_eps must be positive");

        ExperimentConfig cfg{*system, N_grid, trials, seed, b, quantities, grid_points};
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            fail(src, "N_grid", e.what());
        }
        run.sweep.push_back(std::move(cfg));
        resolved_bound = {{"delta", b.delta}, {"eta", b.eta},     {"C", b.C},
                          {"L_x", b.L_x},     {"L_eps", b.L_eps}, {"sigma_eps", b.sigma_eps},
                          {"sigma_x", b.sigma_x}};
    }

    json resolved_reg = {{"kind", std::string(to_string(kind))}, {"beta", beta}};
    resolved_reg["a"] = reg.value("a", json("geometric"));
    if (reg.contains("decay") || !resolved_reg["a"].is_array()) {
        resolved_reg["decay"] = number(src, reg, "decay", 0.5);
    }
    json qs = json::array();
    for (Quantity q : quantities) qs.push_back(std::string(to_string(q)));

    run.resolved = {
        {"T_grid", T_grid},         {"regressor", resolved_reg}, {"input", spec_json(input)},
        {"noise", spec_json(noise)}, {"N_grid", N_grid},          {"trials", trials},
        {"master_seed", seed},      {"bound", resolved_bound},   {"quantities", qs},
        {"grid_points", grid_points},
        {"calibration",
         {{"confidence", opt.confidence}, {"max_C", opt.max_C}, {"rel_precision", opt.rel_precision},
          {"min_points", opt.min_points}, {"min_trials", opt.min_trials}}},
    };
    return run;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigFileError(path + ": cannot open configuration file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path, overrides);
}

void require_quantity(RunConfig& run, Quantity q) {
    for (auto& cfg : run.sweep) {
        if (!cfg.wants(q)) cfg.quantities.push_back(q);
    }
    auto& qs = run.resolved["quantities"];
    const std::string name(to_string(q));
    if (std::find(qs.begin(), qs.end(), json(name)) == qs.end()) qs.push_back(name);
}

}  // namespace firlab
