#pragma once

// Two-sample statistics: empirical CDFs, the Mann-Whitney U test, Cohen's d
// and one-sided bootstrap tests of first-order stochastic dominance.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iaa::stats {

class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A labelled, non-empty sample of finite values.
class Sample {
public:
    Sample(std::vector<double> values, std::string label = {});

    std::span<const double> values() const noexcept { return values_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return values_.size(); }
    double mean() const noexcept;

private:
    std::vector<double> values_;
    std::string label_;
};

/// Right-continuous step function F(x) = #{v <= x} / n.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(const Sample& sample);

    double operator()(double x) const noexcept;

    /// Distinct sample values in increasing order.
    std::span<const double> support() const noexcept { return support_; }
    /// heights()[i] == F(support()[i]); the last entry is exactly 1.
    std::span<const double> heights() const noexcept { return heights_; }

private:
    std::vector<double> sorted_;
    std::vector<double> support_;
    std::vector<double> heights_;
};

EmpiricalCdf empirical_cdf(const Sample& sample);

enum class Alternative { TwoSided, AGreater, ALess };
enum class UTestMethod { Exact, NormalApprox };

std::string_view to_string(Alternative alt) noexcept;
std::string_view to_string(UTestMethod method) noexcept;

struct UTestResult {
    double u_statistic = 0.0;  // U for sample a: #{a_i > b_j} + 0.5 #{a_i == b_j}
    double p_value = 1.0;
    Alternative alternative = Alternative::TwoSided;
    UTestMethod method = UTestMethod::NormalApprox;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    bool degenerate = false;  // every pooled value identical; p fixed at 1
};

/// Largest per-side sample size for which the exact null distribution is used.
inline constexpr std::size_t kExactThreshold = 8;

/// Exact when both sizes are <= kExactThreshold and there are no ties;
/// otherwise normal approximation with tie-corrected variance and a 0.5
/// continuity correction. `allow_exact = false` forces the approximation.
UTestResult mann_whitney(const Sample& a, const Sample& b, Alternative alt = Alternative::TwoSided,
                         bool allow_exact = true);

/// Number of arrangements giving each U in [0, n_a * n_b] under the null,
/// for tie-free samples of sizes n_a and n_b.
std::vector<double> exact_u_counts(std::size_t n_a, std::size_t n_b);

/// Standard normal upper tail.
double normal_sf(double z) noexcept;

struct EffectSize {
    double cohens_d = 0.0;
    double pooled_sd = 0.0;
};

/// (mean_a - mean_b) / pooled SD with n-1 sample variances. Throws when
/// either sample has fewer than 2 values or the pooled SD is zero.
EffectSize cohens_d(const Sample& a, const Sample& b);

enum class FosdHypothesis {
    ADominatesB,  // H0: F_a(x) <= F_b(x) for all x
    BDominatesA,  // H0: F_b(x) <= F_a(x) for all x
};

std::string_view to_string(FosdHypothesis h) noexcept;

struct FosdOptions {
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct FosdResult {
    double statistic = 0.0;  // sqrt(n_a n_b / (n_a + n_b)) * sup_x (F_null_dominant - F_other)
    double p_value = 1.0;
    std::size_t bootstrap_iterations = 0;
    FosdHypothesis hypothesis = FosdHypothesis::ADominatesB;
    std::uint64_t seed = 0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    bool degenerate = false;
};

inline constexpr std::size_t kMinBootstrapIterations = 100;

/// One-sided test of first-order dominance. Bootstrap replicates resample
/// with replacement from the pooled sample into pseudo-samples of sizes n_a
/// and n_b; p is the fraction of replicates whose statistic is >= the
/// observed one. Replicate r draws from its own generator seeded from
/// (seed, r), so results do not depend on `threads`.
FosdResult fosd_test(const Sample& a, const Sample& b, FosdHypothesis hypothesis, const FosdOptions& options = {});

/// sup over the pooled support of n_a * n_b * (F_a(x) - F_b(x)), kept in
/// integers so bootstrap comparisons are exact. Inputs must be sorted.
std::int64_t scaled_sup_cdf_difference(std::span<const double> sorted_a, std::span<const double> sorted_b);

/// Midranks (1-based) of `values`; ties share the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

}  // namespace iaa::stats
