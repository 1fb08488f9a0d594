#pragma once

// Debug-testing effectiveness under the single-failure-region fix model:
// a campaign either reveals the region (which is then removed, pfs -> 0) or
// misses it (pfs stays q). Mile-based testing samples the operational
// profile; scenario-based testing spends t_i tests inside each subdomain.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "scenrel/mc_harness.hpp"
#include "scenrel/scenario_space.hpp"

namespace scenrel {

enum class Verdict { Mile, Scenario, Tie };
std::string_view to_string(Verdict v) noexcept;

struct StrategyComparison {
    double expected_pfs_mile = 0.0;
    double expected_pfs_scenario = 0.0;
    Verdict superior = Verdict::Tie;
    double margin = 0.0;                 // mile − scenario
    std::optional<double> ratio;         // mile / scenario, absent when scenario == 0
};

struct Allocation {
    std::vector<std::uint64_t> per_subdomain;
    std::uint64_t total() const noexcept;
};

struct EqualSplit {};
using AllocationPolicy = std::variant<EqualSplit, std::vector<std::uint64_t>>;

/// Equal split gives ⌊t/n⌋ to every subdomain and one extra test to
/// subdomains 1..(t mod n). An explicit list must sum to t.
Allocation allocate_budget(std::uint64_t t, std::size_t n, const AllocationPolicy& policy);

/// q(1−q)^t.
double expected_pfs_after_mile(double q, std::uint64_t t);

struct DetectionProbability {
    double p_detect = 0.0;
    double p_miss = 1.0;
};

/// (1 − Π(1−d_i)^{t_i}, Π(1−d_i)^{t_i}).
DetectionProbability scenario_detection_probability(std::span<const double> d,
                                                    const Allocation& alloc);

/// q Π(1−d_i)^{t_i}.
double expected_pfs_after_scenario(double q, std::span<const double> d, const Allocation& alloc);

/// Verdict from the exact closed forms. Compared in log space so that very
/// small expectations do not underflow to a false tie; a tie means the two
/// expectations agree to 1e-15 relative.
StrategyComparison compare_closed_forms(double q, std::uint64_t t, std::span<const double> d,
                                        const Allocation& alloc);

/// Constant detection rate d̄ in every subdomain: q(1−d̄)^t vs q(1−q)^t.
StrategyComparison uniform_spread_verdict(double q, double d_bar, std::uint64_t t);

/// Failure region plus the test generator used inside each subdomain.
class SingleRegionModel {
public:
    /// `generators` override the conditional operational profile in their
    /// subdomain; at most one per subdomain.
    SingleRegionModel(ScenarioModel space, FailureRegion region,
                      std::vector<ProposalDistribution> generators = {});

    const ScenarioModel& space() const noexcept { return space_; }
    const FailureRegion& region() const noexcept { return region_; }
    double q() const noexcept { return q_; }
    /// d_i: probability one generated test in D_i hits F.
    std::span<const double> detection_rates() const noexcept { return d_; }
    bool in_region(std::size_t scenario) const { return mask_.at(scenario); }
    /// Generator for D_i; empty for a zero-mass subdomain without a proposal.
    const std::optional<SubdomainSampler>& generator(SubdomainId i) const {
        return generators_.at(i.value - 1);
    }

private:
    ScenarioModel space_;
    FailureRegion region_;
    std::vector<bool> mask_;
    double q_ = 0.0;
    std::vector<double> d_;
    std::vector<std::optional<SubdomainSampler>> generators_;
};

enum class Regime { ScenarioFavoured, MileFavoured, Neither };
std::string_view to_string(Regime r) noexcept;

struct ConcentratedAnalysis {
    SubdomainId k;
    double op_dk = 0.0;          // Op(D_k)
    double inv_n = 0.0;          // 1/n
    Regime regime = Regime::Neither;
    double q = 0.0;
    double d_k = 0.0;            // Op(F)/Op(D_k)
    Allocation allocation;
    StrategyComparison comparison;
    double linear_approximation = 0.0;  // q(1 − t·Op(F))
    double approximation_gap = 0.0;     // |E_scenario − linear_approximation|
};

/// F ⊆ D_k analysis. Regime labels use a factor of 10 for ≪ / ≫; the
/// verdict always comes from the exact expectations.
ConcentratedAnalysis concentrated_region_analysis(const SingleRegionModel& model, SubdomainId k,
                                                  std::uint64_t t,
                                                  const AllocationPolicy& policy = EqualSplit{});

StrategyComparison compare_strategies(const SingleRegionModel& model, std::uint64_t t,
                                      const Allocation& alloc);

struct MileStrategy {};
struct ScenarioStrategy {
    Allocation allocation;
};
using Strategy = std::variant<MileStrategy, ScenarioStrategy>;

/// Monte Carlo estimate of the expected residual pfs after one debug campaign.
mc::EmpiricalEstimate simulate_debug_campaign(const SingleRegionModel& model,
                                              const Strategy& strategy, std::uint64_t t,
                                              std::size_t replicates, std::uint64_t master_seed,
                                              unsigned workers = 0);

/// n subdomains of equal mass, each holding failure mass q/n; the generator
/// in every subdomain hits F with probability d̄. Needs 0 < d̄ < 1 unless q
/// sits at the matching endpoint.
SingleRegionModel make_uniform_spread_model(double q, double d_bar, std::size_t n);

/// F (mass q) inside D_k of mass op_dk; the other n−1 subdomains share the rest.
SingleRegionModel make_concentrated_model(double q, double op_dk, std::size_t n, SubdomainId k);

}  // namespace scenrel
