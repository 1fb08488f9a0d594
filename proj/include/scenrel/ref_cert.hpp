#pragma once

// Risk estimation fidelity: does a simulator's pfs estimate stay within ε of
// the real-world estimate with probability at least 1−α? The probability is
// evaluated under the CLT Gaussian approximation of Δ̂ = θ̂s − θ̂r with Wald
// variances on both sides.

#include <cstdint>
#include <optional>

#include "scenrel/estimators.hpp"
#include "scenrel/mc_harness.hpp"

namespace scenrel {

enum class ToleranceMode { Absolute, Relative };

struct RefCriterion {
    double epsilon = 0.02;
    double alpha = 0.05;
    /// Relative mode certifies against ε·θ̂r instead of ε.
    ToleranceMode mode = ToleranceMode::Absolute;

    /// Throws Error(Domain) unless both lie strictly inside (0, 1).
    void validate() const;
};

struct PairedCampaigns {
    CampaignOutcome real;
    CampaignOutcome synthetic;
};

struct DeltaDistribution {
    double mu = 0.0;
    double sigma = 0.0;
    bool real_small_sample = false;
    bool synthetic_small_sample = false;
    /// sigma == 0: the test degenerates to |mu| <= ε.
    bool degenerate = false;
};

/// θ̂s − θ̂r from integer cross-products, so it is the correctly rounded
/// value of the exact rational difference.
double mle_difference(const PairedCampaigns& pair);

DeltaDistribution delta_distribution(const PairedCampaigns& pair);

/// Pr(|Δ̂| <= ε) = Φ((ε−μ)/σ) − Φ((−ε−μ)/σ).
double ref_coverage(const DeltaDistribution& delta, double epsilon);

struct RefAssessment {
    RefCriterion criterion;
    double effective_epsilon = 0.0;
    DeltaDistribution delta;
    double coverage = 0.0;
    bool certified = false;
    std::optional<double> epsilon_star;
};

/// Certified iff coverage >= 1−α (the boundary certifies).
RefAssessment certify_ref(const PairedCampaigns& pair, const RefCriterion& criterion);

/// Smallest ε with coverage(ε) = 1−α, by bisection down to adjacent doubles.
/// For sigma == 0 this is |mu|.
double smallest_certifiable_epsilon(const DeltaDistribution& delta, double alpha);
double smallest_certifiable_epsilon(const PairedCampaigns& pair, double alpha);

struct ErrorDecomposition {
    double sim_sampling = 0.0;   // θ̂s − θs
    double sim_bias = 0.0;       // θs − θr
    double real_sampling = 0.0;  // θr − θ̂r
    double sum() const noexcept { return sim_sampling + sim_bias + real_sampling; }
};

ErrorDecomposition decompose_error(double theta_r_true, double theta_s_true,
                                   const PairedCampaigns& pair);

/// Wald interval for the scaled-up synthetic campaign.
WaldInterval scale_up_interval(const CampaignOutcome& outcome, double confidence);

/// Fraction of simulated paired Bernoulli campaigns that certify.
mc::EmpiricalEstimate ref_operating_characteristics(double theta_r_true, double theta_s_true,
                                                    std::uint64_t t_r, std::uint64_t t_s,
                                                    const RefCriterion& criterion,
                                                    std::size_t replicates,
                                                    std::uint64_t master_seed,
                                                    unsigned workers = 0);

}  // namespace scenrel
