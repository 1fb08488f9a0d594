#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scenrel/mc_harness.hpp"

namespace scenrel {

/// Logical-scenario (subdomain) index, 1-based as in the input files.
struct SubdomainId {
    std::size_t value = 1;
    friend auto operator<=>(const SubdomainId&, const SubdomainId&) = default;
};

/// Raw, possibly invalid description of a partitioned concrete-scenario space.
struct ScenarioSpace {
    std::vector<std::string> scenarios;
    std::map<std::string, std::size_t> partition;  // scenario id -> subdomain (1..n)
    std::size_t n_subdomains = 0;
};

struct OperationalProfile {
    std::map<std::string, double> mass;
};

struct FailureRegion {
    std::set<std::string> members;
};

/// Test-generation distribution used inside one subdomain.
struct ProposalDistribution {
    SubdomainId subdomain;
    std::map<std::string, double> mass;
};

inline constexpr double kMassTolerance = 1e-12;

enum class ViolationKind {
    NoSubdomains,
    DuplicateScenario,
    UncoveredScenario,
    UnknownPartitionEntry,
    SubdomainOutOfRange,
    EmptySubdomain,
    NegativeMass,
    NonFiniteMass,
    MissingMass,
    UnknownMassEntry,
    MassSum,
};

struct Violation {
    ViolationKind kind;
    std::string scenario;  // empty when the violation is not tied to one scenario
    std::string message;
};

/// Every broken invariant of (space, op); empty iff valid.
std::vector<Violation> validate_space(const ScenarioSpace& space, const OperationalProfile& op);

/// Violations of a proposal against a validated model (support, normalisation,
/// absolute continuity with respect to the operational profile).
class ScenarioModel;
std::vector<Violation> validate_proposal(const ScenarioModel& model,
                                         const ProposalDistribution& proposal);

/// Inverse-CDF sampler over a fixed list of weights.
class DiscreteSampler {
public:
    DiscreteSampler() = default;
    explicit DiscreteSampler(std::span<const double> weights);

    std::size_t draw(mc::RngStream& rng) const;
    std::size_t size() const noexcept { return cumulative_.size(); }

private:
    std::vector<double> cumulative_;
    std::size_t last_positive_ = 0;
};

/// Draws from a proposal; returns global scenario indices.
class SubdomainSampler {
public:
    SubdomainSampler(std::vector<std::size_t> members, std::span<const double> weights)
        : members_(std::move(members)), sampler_(weights) {}

    std::size_t draw(mc::RngStream& rng) const { return members_[sampler_.draw(rng)]; }

private:
    std::vector<std::size_t> members_;
    DiscreteSampler sampler_;
};

/// Validated, indexed scenario space with its operational profile. Immutable.
class ScenarioModel {
public:
    /// Throws Error(Domain) listing all violations when the input is invalid.
    ScenarioModel(ScenarioSpace space, OperationalProfile op);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t n_subdomains() const noexcept { return members_.size(); }
    const std::string& id(std::size_t index) const { return ids_.at(index); }
    std::size_t index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.contains(id); }
    SubdomainId subdomain_of(std::size_t index) const { return {subdomain_.at(index) + 1}; }
    double mass(std::size_t index) const { return mass_.at(index); }
    std::span<const std::size_t> members(SubdomainId i) const;

    /// θ: operational mass of the failure region.
    double true_pfs(const FailureRegion& region) const;
    /// Op_i.
    double subdomain_mass(SubdomainId i) const;
    /// θ_i = Op(F ∩ D_i) / Op_i; throws UndefinedConditional when Op_i = 0.
    double conditional_pfs(const FailureRegion& region, SubdomainId i) const;
    /// d_k = Op(F) / Op(D_k); requires F ⊆ D_k.
    double detection_rate(const FailureRegion& region, SubdomainId k) const;
    /// |θ − Σ θ_i Op_i| with zero-mass subdomains contributing 0.
    double total_probability_check(const FailureRegion& region) const;

    /// Scenario index drawn from the operational profile.
    std::size_t sample_operational(mc::RngStream& rng) const { return op_sampler_.draw(rng); }
    /// Scenario index drawn from the proposal (validated on construction).
    SubdomainSampler proposal_sampler(const ProposalDistribution& proposal) const;
    /// Sampler for the conditional operational profile inside D_i.
    SubdomainSampler conditional_sampler(SubdomainId i) const;

    std::size_t sample_subdomain(const ProposalDistribution& proposal, mc::RngStream& rng) const {
        return proposal_sampler(proposal).draw(rng);
    }

    /// Membership mask of a region; throws Domain on unknown members.
    std::vector<bool> region_mask(const FailureRegion& region) const;

private:
    void check_subdomain(SubdomainId i) const;

    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> subdomain_;  // 0-based
    std::vector<double> mass_;
    std::vector<std::vector<std::size_t>> members_;
    DiscreteSampler op_sampler_;
};

}  // namespace scenrel
