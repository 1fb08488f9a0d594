#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace scenrel {

/// Sufficient statistic of a test campaign: t scenarios run, k failed.
struct CampaignOutcome {
    std::uint64_t t = 0;
    std::uint64_t k = 0;

    CampaignOutcome() = default;
    /// Throws Error(Domain) when k > t.
    CampaignOutcome(std::uint64_t tests, std::uint64_t failures);

    friend bool operator==(const CampaignOutcome&, const CampaignOutcome&) = default;
};

struct BetaPrior {
    double a = 1.0;
    double b = 1.0;
};

/// Density tabulated on a uniform grid over [0, 1] (first point 0, last 1).
struct GridPrior {
    std::vector<double> density;
};

class PriorSpec {
public:
    static PriorSpec beta(double a, double b);
    /// Requires >= 3 nonnegative values whose trapezoid integral is 1 ± 1e-6.
    static PriorSpec grid(std::vector<double> density);

    const std::variant<BetaPrior, GridPrior>& kind() const noexcept { return kind_; }

private:
    explicit PriorSpec(std::variant<BetaPrior, GridPrior> kind) : kind_(std::move(kind)) {}
    std::variant<BetaPrior, GridPrior> kind_;
};

enum class PosteriorMethod { ClosedFormConjugate, Quadrature };

struct PosteriorSummary {
    double mean = 0.0;
    PosteriorMethod method = PosteriorMethod::ClosedFormConjugate;
    double quadrature_error = 0.0;
};

/// θ^k (1−θ)^(t−k), the probability of one particular outcome sequence.
/// Evaluated in log space; 0^0 = 1.
double likelihood(const CampaignOutcome& outcome, double theta);
double log_likelihood(const CampaignOutcome& outcome, double theta);

/// k / t; throws InsufficientData for t = 0.
double mle_pfs(const CampaignOutcome& outcome);

/// E[θ | k, t] under the prior: conjugate closed form for Beta priors,
/// composite Simpson in log space for tabulated priors. The error estimate
/// is the difference against the same rule on the half-resolution grid.
PosteriorSummary posterior_mean(const CampaignOutcome& outcome, const PriorSpec& prior);

/// θ̂(1−θ̂)/t with θ̂ = k/t. Zero at k = 0 or k = t.
double wald_variance(const CampaignOutcome& outcome);

/// Wald approximation is suspect when fewer than 5 failures or 5 successes.
bool small_sample(const CampaignOutcome& outcome) noexcept;

struct WaldInterval {
    double estimate = 0.0;
    double standard_error = 0.0;
    double z = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool small_sample_warning = false;
};

/// θ̂ ± Φ⁻¹((1+confidence)/2)·√Var, clamped to [0, 1].
WaldInterval wald_confidence_interval(const CampaignOutcome& outcome, double confidence);

struct WeightedSample {
    std::string scenario;
    bool failed = false;
    double weight = 0.0;  // Op(x) / proposal(x)
};

struct ImportanceEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

/// Self-normalised importance sampling estimate Σ w·fail / Σ w with a
/// delta-method standard error.
ImportanceEstimate importance_sampling_pfs(std::span<const WeightedSample> samples);

namespace detail {
/// (1/m) Σ w·fail, unbiased for the conditional pfs when the proposal is normalised.
double plain_importance_mean(std::span<const WeightedSample> samples);
}  // namespace detail

/// Σ θ̂_i Op_i.
double pooled_total_pfs(std::span<const double> theta, std::span<const double> op_mass);

}  // namespace scenrel
