#pragma once

// Seeded sub-Gaussian sources for FIR inputs and noise.
//
// Every sequence is a pure function of (DistributionSpec, SeedSpec, length):
// the generator is constructed from the pair (master_seed, stream_id) and
// consumed from the start, so trials can run on any thread in any order.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace firlab {

enum class Family {
    Gaussian,
    Rademacher,
    Uniform,
    ScaledGaussianHeteroNoise,
};

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Centered distribution with known variance and Orlicz psi_2 norm.
///
/// For ScaledGaussianHeteroNoise, entry t is N(0, s_t^2) with s_t taken
/// cyclically from `per_index_scale`; `variance` is then the declared common
/// upper bound and must dominate every s_t^2.
class DistributionSpec {
public:
    DistributionSpec(Family family, double variance,
                     std::vector<double> per_index_scale = {});

    static DistributionSpec gaussian(double variance = 1.0) { return {Family::Gaussian, variance}; }
    static DistributionSpec rademacher(double variance = 1.0) { return {Family::Rademacher, variance}; }
    static DistributionSpec uniform(double variance = 1.0) { return {Family::Uniform, variance}; }
    static DistributionSpec hetero_gaussian(double variance_bound, std::vector<double> scales) {
        return {Family::ScaledGaussianHeteroNoise, variance_bound, std::move(scales)};
    }

    Family family() const { return family_; }
    double variance() const { return variance_; }
    double psi2_norm() const { return psi2_norm_; }
    const std::vector<double>& per_index_scale() const { return per_index_scale_; }

    /// Variance of the entry at 0-based position t.
    double variance_at(std::size_t t) const;

private:
    Family family_;
    double variance_;
    double psi2_norm_;
    std::vector<double> per_index_scale_;
};

/// Exact psi_2 norm (smallest c with E exp(x^2/c^2) <= 2) of the family scaled
/// to the given variance. Variance 0 is the point mass at zero and returns 0.
double psi2_norm_of(Family family, double variance = 1.0);

/// psi_2 norm of a spec, accounting for heterogeneous scales.
double psi2_norm_of(const DistributionSpec& spec);

/// Engine for one stream. Seeded from both halves of the two 64-bit words.
std::mt19937_64 make_engine(const SeedSpec& seed);

std::vector<double> draw_sequence(const DistributionSpec& spec, const SeedSpec& seed,
                                  std::size_t length);

}  // namespace firlab
