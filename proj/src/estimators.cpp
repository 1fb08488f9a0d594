#include "scenrel/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scenrel/error.hpp"
#include "scenrel/normal.hpp"
#include "scenrel/scenario_space.hpp"

namespace scenrel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Composite Simpson on a uniform grid with spacing h; a trailing odd panel
// uses the 3/8 rule, two points fall back to the trapezoid.
double simpson(std::span<const double> y, double h) {
    const std::size_t m = y.size() - 1;  // intervals
    if (m == 0) return 0.0;
    if (m == 1) return 0.5 * h * (y[0] + y[1]);
    const std::size_t even = (m % 2 == 0) ? m : m - 3;
    double acc = 0.0;
    if (even > 0) {
        double s = y[0] + y[even];
        for (std::size_t j = 1; j < even; ++j) s += (j % 2 == 1 ? 4.0 : 2.0) * y[j];
        acc = s * h / 3.0;
    }
    if (even != m) {
        const std::size_t j = even;
        acc += 3.0 * h / 8.0 * (y[j] + 3.0 * y[j + 1] + 3.0 * y[j + 2] + y[j + 3]);
    }
    return acc;
}

struct QuadratureResult {
    double mean;
    bool degenerate;
};

QuadratureResult grid_posterior_mean(const CampaignOutcome& outcome,
                                     std::span<const double> density, std::size_t stride) {
    const std::size_t n_full = density.size();
    const std::size_t n = (n_full - 1) / stride + 1;
    const double h = static_cast<double>(stride) / static_cast<double>(n_full - 1);

    std::vector<double> log_w(n);
    double peak = kNegInf;
    for (std::size_t j = 0; j < n; ++j) {
        const double theta = std::min(1.0, static_cast<double>(j) * h);
        const double f = density[j * stride];
        log_w[j] = f > 0.0 ? log_likelihood(outcome, theta) + std::log(f) : kNegInf;
        peak = std::max(peak, log_w[j]);
    }
    if (!std::isfinite(peak)) return {0.0, true};

    std::vector<double> w(n), tw(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double theta = std::min(1.0, static_cast<double>(j) * h);
        w[j] = std::exp(log_w[j] - peak);
        tw[j] = theta * w[j];
    }
    const double den = simpson(w, h);
    if (!(den > 0.0)) return {0.0, true};
    return {std::clamp(simpson(tw, h) / den, 0.0, 1.0), false};
}

}  // namespace

CampaignOutcome::CampaignOutcome(std::uint64_t tests, std::uint64_t failures)
    : t(tests), k(failures) {
    SCENREL_REQUIRE(k <= t, ErrorCode::Domain,
                    "campaign outcome needs k <= t (k=" + std::to_string(k) +
                        ", t=" + std::to_string(t) + ")");
}

PriorSpec PriorSpec::beta(double a, double b) {
    SCENREL_REQUIRE(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b), ErrorCode::Domain,
                    "beta prior needs a > 0 and b > 0");
    return PriorSpec(BetaPrior{a, b});
}

PriorSpec PriorSpec::grid(std::vector<double> density) {
    SCENREL_REQUIRE(density.size() >= 3, ErrorCode::Domain, "grid prior needs at least 3 points");
    double integral = 0.0;
    const double h = 1.0 / static_cast<double>(density.size() - 1);
    for (std::size_t j = 0; j < density.size(); ++j) {
        SCENREL_REQUIRE(std::isfinite(density[j]) && density[j] >= 0.0, ErrorCode::Domain,
                        "grid prior density must be finite and nonnegative");
        const double weight = (j == 0 || j + 1 == density.size()) ? 0.5 : 1.0;
        integral += weight * density[j] * h;
    }
    SCENREL_REQUIRE(std::abs(integral - 1.0) <= 1e-6, ErrorCode::Domain,
                    "grid prior must integrate to 1 (trapezoid integral = " +
                        std::to_string(integral) + ")");
    return PriorSpec(GridPrior{std::move(density)});
}

double log_likelihood(const CampaignOutcome& outcome, double theta) {
    SCENREL_REQUIRE(theta >= 0.0 && theta <= 1.0, ErrorCode::Domain,
                    "likelihood: theta outside [0,1]");
    const auto k = static_cast<double>(outcome.k);
    const auto misses = static_cast<double>(outcome.t - outcome.k);
    const double fail_term = outcome.k == 0 ? 0.0 : k * std::log(theta);
    const double pass_term = outcome.t == outcome.k ? 0.0 : misses * std::log1p(-theta);
    return fail_term + pass_term;
}

double likelihood(const CampaignOutcome& outcome, double theta) {
    return std::exp(log_likelihood(outcome, theta));
}

double mle_pfs(const CampaignOutcome& outcome) {
    SCENREL_REQUIRE(outcome.t >= 1, ErrorCode::InsufficientData, "MLE needs at least one test");
    return static_cast<double>(outcome.k) / static_cast<double>(outcome.t);
}

PosteriorSummary posterior_mean(const CampaignOutcome& outcome, const PriorSpec& prior) {
    if (const auto* beta = std::get_if<BetaPrior>(&prior.kind())) {
        const double mean = (beta->a + static_cast<double>(outcome.k)) /
                            (beta->a + beta->b + static_cast<double>(outcome.t));
        return {mean, PosteriorMethod::ClosedFormConjugate, 0.0};
    }
    const auto& density = std::get<GridPrior>(prior.kind()).density;
    const auto full = grid_posterior_mean(outcome, density, 1);
    SCENREL_REQUIRE(!full.degenerate, ErrorCode::NumericalDegeneracy,
                    "posterior mass underflows on the prior grid");
    double err = 0.0;
    if (density.size() >= 5) {
        const auto half = grid_posterior_mean(outcome, density, 2);
        err = half.degenerate ? std::numeric_limits<double>::infinity()
                              : std::abs(full.mean - half.mean);
    }
    return {full.mean, PosteriorMethod::Quadrature, err};
}

double wald_variance(const CampaignOutcome& outcome) {
    const double p = mle_pfs(outcome);
    return p * (1.0 - p) / static_cast<double>(outcome.t);
}

bool small_sample(const CampaignOutcome& outcome) noexcept {
    return outcome.k < 5 || outcome.t - outcome.k < 5;
}

WaldInterval wald_confidence_interval(const CampaignOutcome& outcome, double confidence) {
    SCENREL_REQUIRE(confidence > 0.0 && confidence < 1.0, ErrorCode::Domain,
                    "confidence must lie in (0,1)");
    WaldInterval ci;
    ci.estimate = mle_pfs(outcome);
    ci.standard_error = std::sqrt(wald_variance(outcome));
    ci.z = normal_quantile(0.5 * (1.0 + confidence));
    ci.lo = std::clamp(ci.estimate - ci.z * ci.standard_error, 0.0, 1.0);
    ci.hi = std::clamp(ci.estimate + ci.z * ci.standard_error, 0.0, 1.0);
    ci.small_sample_warning = small_sample(outcome);
    return ci;
}

ImportanceEstimate importance_sampling_pfs(std::span<const WeightedSample> samples) {
    SCENREL_REQUIRE(!samples.empty(), ErrorCode::InsufficientData,
                    "importance sampling needs at least one sample");
    double sum_w = 0.0;
    double sum_wf = 0.0;
    for (const auto& s : samples) {
        SCENREL_REQUIRE(std::isfinite(s.weight) && s.weight >= 0.0, ErrorCode::Domain,
                        "importance weight must be finite and nonnegative");
        sum_w += s.weight;
        if (s.failed) sum_wf += s.weight;
    }
    SCENREL_REQUIRE(sum_w > 0.0, ErrorCode::NumericalDegeneracy, "all importance weights are zero");
    const double est = sum_wf / sum_w;
    double ss = 0.0;
    for (const auto& s : samples) {
        const double r = (s.failed ? 1.0 : 0.0) - est;
        ss += s.weight * s.weight * r * r;
    }
    return {est, std::sqrt(ss) / sum_w, samples.size()};
}

double detail::plain_importance_mean(std::span<const WeightedSample> samples) {
    SCENREL_REQUIRE(!samples.empty(), ErrorCode::InsufficientData,
                    "importance sampling needs at least one sample");
    double acc = 0.0;
    for (const auto& s : samples)
        if (s.failed) acc += s.weight;
    return acc / static_cast<double>(samples.size());
}

double pooled_total_pfs(std::span<const double> theta, std::span<const double> op_mass) {
    SCENREL_REQUIRE(theta.size() == op_mass.size(), ErrorCode::Domain,
                    "pooling: estimate and mass lists differ in length");
    double mass_sum = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        SCENREL_REQUIRE(theta[i] >= 0.0 && theta[i] <= 1.0, ErrorCode::Domain,
                        "pooling: subdomain estimate outside [0,1]");
        SCENREL_REQUIRE(op_mass[i] >= 0.0, ErrorCode::Domain, "pooling: negative subdomain mass");
        mass_sum += op_mass[i];
        acc += theta[i] * op_mass[i];
    }
    SCENREL_REQUIRE(std::abs(mass_sum - 1.0) <= kMassTolerance, ErrorCode::Domain,
                    "pooling: subdomain masses do not sum to 1");
    return std::clamp(acc, 0.0, 1.0);
}

}  // namespace scenrel
