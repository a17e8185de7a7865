#include "firlab/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "firlab/errors.hpp"

namespace firlab {

namespace {

// E exp(k U^2) for U ~ Uniform[0,1], as the everywhere-convergent series
// sum_n k^n / (n! (2n+1)).
double uniform_square_mgf(double k) {
    double term = 1.0;  // k^n / n!
    double sum = 1.0;
    for (int n = 1; n < 200; ++n) {
        term *= k / n;
        const double add = term / (2.0 * n + 1.0);
        sum += add;
        if (add < 1e-18 * sum) break;
    }
    return sum;
}

// Root of E exp(k U^2) = 2; the psi_2 norm of Uniform[-a,a] is a / sqrt(k*).
double uniform_psi2_root() {
    static const double root = [] {
        double lo = 0.0, hi = 4.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (uniform_square_mgf(mid) < 2.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }();
    return root;
}

}  // namespace

std::string_view to_string(Family family) {
    switch (family) {
        case Family::Gaussian: return "gaussian";
        case Family::Rademacher: return "rademacher";
        case Family::Uniform: return "uniform";
        case Family::ScaledGaussianHeteroNoise: return "hetero_gaussian";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    if (name == "gaussian") return Family::Gaussian;
    if (name == "rademacher") return Family::Rademacher;
    if (name == "uniform") return Family::Uniform;
    if (name == "hetero_gaussian") return Family::ScaledGaussianHeteroNoise;
    throw ConfigError("unknown distribution family '" + std::string(name) + "'");
}

DistributionSpec::DistributionSpec(Family family, double variance,
                                   std::vector<double> per_index_scale)
    : family_(family), variance_(variance), per_index_scale_(std::move(per_index_scale)) {
    if (!(variance_ > 0.0) || !std::isfinite(variance_)) {
        throw ConfigError("distribution variance must be positive and finite");
    }
    if (family_ == Family::ScaledGaussianHeteroNoise) {
        if (per_index_scale_.empty()) {
            throw ConfigError("hetero_gaussian requires a non-empty per_index_scale");
        }
        for (double s : per_index_scale_) {
            if (!(s > 0.0) || !std::isfinite(s)) {
                throw ConfigError("per_index_scale entries must be positive");
            }
            // declared variance is the common upper bound
            if (s * s > variance_ * (1.0 + 1e-12)) {
                throw ConfigError("per_index_scale entry exceeds the declared variance bound");
            }
        }
    } else if (!per_index_scale_.empty()) {
        throw ConfigError("per_index_scale is only valid for hetero_gaussian");
    }
    psi2_norm_ = psi2_norm_of(*this);
}

double DistributionSpec::variance_at(std::size_t t) const {
    if (per_index_scale_.empty()) return variance_;
    const double s = per_index_scale_[t % per_index_scale_.size()];
    return s * s;
}

double psi2_norm_of(Family family, double variance) {
    if (variance < 0.0 || !std::isfinite(variance)) {
        throw ConfigError("variance must be nonnegative");
    }
    const double sd = std::sqrt(variance);
    switch (family) {
        case Family::Gaussian:
            // (1 - 2 sd^2/c^2)^{-1/2} = 2
            return sd * std::sqrt(8.0 / 3.0);
        case Family::Rademacher:
            // exp(sd^2/c^2) = 2
            return sd / std::sqrt(std::log(2.0));
        case Family::Uniform:
            return std::sqrt(3.0) * sd / std::sqrt(uniform_psi2_root());
        case Family::ScaledGaussianHeteroNoise:
            throw UnsupportedFamilyError(
                "hetero_gaussian psi_2 norm depends on per-index scales; use the spec overload");
    }
    throw UnsupportedFamilyError("no closed-form psi_2 norm");
}

double psi2_norm_of(const DistributionSpec& spec) {
    if (spec.family() != Family::ScaledGaussianHeteroNoise) {
        return psi2_norm_of(spec.family(), spec.variance());
    }
    const auto& s = spec.per_index_scale();
    const double max_scale = *std::max_element(s.begin(), s.end());
    return psi2_norm_of(Family::Gaussian, max_scale * max_scale);
}

std::mt19937_64 make_engine(const SeedSpec& seed) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed.master_seed),
        static_cast<std::uint32_t>(seed.master_seed >> 32),
        static_cast<std::uint32_t>(seed.stream_id),
        static_cast<std::uint32_t>(seed.stream_id >> 32),
    };
    return std::mt19937_64(seq);
}

std::vector<double> draw_sequence(const DistributionSpec& spec, const SeedSpec& seed,
                                  std::size_t length) {
    if (length == 0) throw ConfigError("draw_sequence: length must be at least 1");

    auto engine = make_engine(seed);
    std::vector<double> out(length);
    const double sd = std::sqrt(spec.variance());

    switch (spec.family()) {
        case Family::Gaussian: {
            std::normal_distribution<double> dist(0.0, sd);
            for (auto& v : out) v = dist(engine);
            break;
        }
        case Family::Rademacher: {
            std::bernoulli_distribution coin(0.5);
            for (auto& v : out) v = coin(engine) ? sd : -sd;
            break;
        }
        case Family::Uniform: {
            const double half_width = std::sqrt(3.0) * sd;
            std::uniform_real_distribution<double> dist(-half_width, half_width);
            for (auto& v : out) v = dist(engine);
            break;
        }
        case Family::ScaledGaussianHeteroNoise: {
            std::normal_distribution<double> dist(0.0, 1.0);
            const auto& scales = spec.per_index_scale();
            for (std::size_t t = 0; t < length; ++t) {
                out[t] = scales[t % scales.size()] * dist(engine);
            }
            break;
        }
    }
    return out;
}

}  // namespace firlab
