#include "scenrel/ref_cert.hpp"

#include <cmath>
#include <limits>

#include "scenrel/error.hpp"
#include "scenrel/normal.hpp"

namespace scenrel {

void RefCriterion::validate() const {
    SCENREL_REQUIRE(epsilon > 0.0 && epsilon < 1.0, ErrorCode::Domain, "epsilon must lie in (0,1)");
    SCENREL_REQUIRE(alpha > 0.0 && alpha < 1.0, ErrorCode::Domain, "alpha must lie in (0,1)");
}

double mle_difference(const PairedCampaigns& pair) {
    const auto& r = pair.real;
    const auto& s = pair.synthetic;
    SCENREL_REQUIRE(r.t >= 1 && s.t >= 1, ErrorCode::InsufficientData,
                    "both campaigns need at least one test");
    constexpr std::uint64_t kLimit = std::uint64_t{1} << 31;
    if (r.t < kLimit && s.t < kLimit) {
        const auto num = static_cast<std::int64_t>(s.k * r.t) - static_cast<std::int64_t>(r.k * s.t);
        return static_cast<double>(num) / static_cast<double>(s.t * r.t);
    }
    return mle_pfs(s) - mle_pfs(r);
}

DeltaDistribution delta_distribution(const PairedCampaigns& pair) {
    DeltaDistribution d;
    d.mu = mle_difference(pair);
    d.sigma = std::sqrt(wald_variance(pair.synthetic) + wald_variance(pair.real));
    d.real_small_sample = small_sample(pair.real);
    d.synthetic_small_sample = small_sample(pair.synthetic);
    d.degenerate = d.sigma == 0.0;
    return d;
}

double ref_coverage(const DeltaDistribution& delta, double epsilon) {
    if (delta.sigma == 0.0) return std::abs(delta.mu) <= epsilon ? 1.0 : 0.0;
    return normal_cdf((epsilon - delta.mu) / delta.sigma) -
           normal_cdf((-epsilon - delta.mu) / delta.sigma);
}

RefAssessment certify_ref(const PairedCampaigns& pair, const RefCriterion& criterion) {
    criterion.validate();
    RefAssessment a;
    a.criterion = criterion;
    a.delta = delta_distribution(pair);
    a.effective_epsilon = criterion.mode == ToleranceMode::Relative
                              ? criterion.epsilon * mle_pfs(pair.real)
                              : criterion.epsilon;
    a.coverage = ref_coverage(a.delta, a.effective_epsilon);
    a.certified = a.coverage >= 1.0 - criterion.alpha;
    return a;
}

double smallest_certifiable_epsilon(const DeltaDistribution& delta, double alpha) {
    SCENREL_REQUIRE(alpha > 0.0 && alpha < 1.0, ErrorCode::Domain, "alpha must lie in (0,1)");
    if (delta.sigma == 0.0) return std::abs(delta.mu);
    const double target = 1.0 - alpha;
    double lo = 0.0;
    double hi = 1.0;
    // sigma <= sqrt(0.5), so this terminates after a few doublings.
    while (ref_coverage(delta, hi) < target) hi *= 2.0;
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (ref_coverage(delta, mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double smallest_certifiable_epsilon(const PairedCampaigns& pair, double alpha) {
    return smallest_certifiable_epsilon(delta_distribution(pair), alpha);
}

ErrorDecomposition decompose_error(double theta_r_true, double theta_s_true,
                                   const PairedCampaigns& pair) {
    SCENREL_REQUIRE(theta_r_true >= 0.0 && theta_r_true <= 1.0 && theta_s_true >= 0.0 &&
                        theta_s_true <= 1.0,
                    ErrorCode::Domain, "ground-truth pfs must lie in [0,1]");
    const double est_r = mle_pfs(pair.real);
    const double est_s = mle_pfs(pair.synthetic);
    return {est_s - theta_s_true, theta_s_true - theta_r_true, theta_r_true - est_r};
}

WaldInterval scale_up_interval(const CampaignOutcome& outcome, double confidence) {
    return wald_confidence_interval(outcome, confidence);
}

mc::EmpiricalEstimate ref_operating_characteristics(double theta_r_true, double theta_s_true,
                                                    std::uint64_t t_r, std::uint64_t t_s,
                                                    const RefCriterion& criterion,
                                                    std::size_t replicates,
                                                    std::uint64_t master_seed, unsigned workers) {
    SCENREL_REQUIRE(theta_r_true >= 0.0 && theta_r_true <= 1.0 && theta_s_true >= 0.0 &&
                        theta_s_true <= 1.0,
                    ErrorCode::Domain, "ground-truth pfs must lie in [0,1]");
    SCENREL_REQUIRE(t_r >= 1 && t_s >= 1, ErrorCode::InsufficientData,
                    "both campaigns need at least one test");
    criterion.validate();

    auto binomial = [](mc::RngStream& rng, std::uint64_t n, double p) {
        std::uint64_t k = 0;
        for (std::uint64_t j = 0; j < n; ++j) k += rng.bernoulli(p) ? 1 : 0;
        return k;
    };
    auto task = [&](mc::RngStream& rng) {
        const CampaignOutcome real(t_r, binomial(rng, t_r, theta_r_true));
        const CampaignOutcome synthetic(t_s, binomial(rng, t_s, theta_s_true));
        return certify_ref({real, synthetic}, criterion).certified ? 1.0 : 0.0;
    };
    return mc::run_replicated(task, replicates, mc::SeedPolicy{master_seed}, workers);
}

}  // namespace scenrel
