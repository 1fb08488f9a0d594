#include "scenrel/scenario_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scenrel/error.hpp"

namespace scenrel {

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.message;
    }
    return out;
}

}  // namespace

std::vector<Violation> validate_space(const ScenarioSpace& space, const OperationalProfile& op) {
    std::vector<Violation> out;
    auto add = [&](ViolationKind kind, const std::string& id, std::string msg) {
        out.push_back({kind, id, std::move(msg)});
    };

    if (space.n_subdomains == 0) add(ViolationKind::NoSubdomains, "", "space has no subdomains");

    std::set<std::string> seen;
    std::vector<std::size_t> population(space.n_subdomains, 0);
    for (const auto& id : space.scenarios) {
        if (!seen.insert(id).second) {
            add(ViolationKind::DuplicateScenario, id, "duplicate scenario id '" + id + "'");
            continue;
        }
        const auto it = space.partition.find(id);
        if (it == space.partition.end()) {
            add(ViolationKind::UncoveredScenario, id,
                "uncovered scenario '" + id + "' (not assigned to any subdomain)");
        } else if (it->second < 1 || it->second > space.n_subdomains) {
            add(ViolationKind::SubdomainOutOfRange, id,
                "scenario '" + id + "' assigned to subdomain " + std::to_string(it->second) +
                    " outside 1.." + std::to_string(space.n_subdomains));
        } else {
            ++population[it->second - 1];
        }
    }
    for (const auto& [id, sub] : space.partition) {
        if (!seen.contains(id))
            add(ViolationKind::UnknownPartitionEntry, id,
                "partition names unknown scenario '" + id + "'");
    }
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (population[i] == 0)
            add(ViolationKind::EmptySubdomain, "", "subdomain " + std::to_string(i + 1) + " is empty");
    }

    double sum = 0.0;
    bool sum_meaningful = true;
    for (const auto& id : seen) {
        const auto it = op.mass.find(id);
        if (it == op.mass.end()) {
            add(ViolationKind::MissingMass, id, "no operational mass for scenario '" + id + "'");
            continue;
        }
        if (!std::isfinite(it->second)) {
            add(ViolationKind::NonFiniteMass, id, "non-finite mass for scenario '" + id + "'");
            sum_meaningful = false;
        } else if (it->second < 0.0) {
            add(ViolationKind::NegativeMass, id, "negative mass for scenario '" + id + "'");
        }
        if (std::isfinite(it->second)) sum += it->second;
    }
    for (const auto& [id, m] : op.mass) {
        if (!seen.contains(id))
            add(ViolationKind::UnknownMassEntry, id, "mass given for unknown scenario '" + id + "'");
    }
    if (sum_meaningful && std::abs(sum - 1.0) > kMassTolerance)
        add(ViolationKind::MassSum, "", "mass sum != 1 (sum = " + std::to_string(sum) + ")");
    return out;
}

std::vector<Violation> validate_proposal(const ScenarioModel& model,
                                         const ProposalDistribution& proposal) {
    std::vector<Violation> out;
    auto add = [&](ViolationKind kind, const std::string& id, std::string msg) {
        out.push_back({kind, id, std::move(msg)});
    };
    const std::size_t i = proposal.subdomain.value;
    if (i < 1 || i > model.n_subdomains()) {
        add(ViolationKind::SubdomainOutOfRange, "",
            "proposal subdomain " + std::to_string(i) + " out of range");
        return out;
    }
    double sum = 0.0;
    for (const auto& [id, p] : proposal.mass) {
        if (!model.contains(id)) {
            add(ViolationKind::UnknownMassEntry, id, "proposal names unknown scenario '" + id + "'");
            continue;
        }
        if (model.subdomain_of(model.index_of(id)).value != i)
            add(ViolationKind::SubdomainOutOfRange, id,
                "proposal support '" + id + "' lies outside subdomain " + std::to_string(i));
        if (!std::isfinite(p) || p < 0.0) {
            add(ViolationKind::NegativeMass, id, "invalid proposal mass for '" + id + "'");
            continue;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kMassTolerance)
        add(ViolationKind::MassSum, "", "proposal mass sum != 1 (sum = " + std::to_string(sum) + ")");
    for (std::size_t idx : model.members({i})) {
        if (model.mass(idx) <= 0.0) continue;
        const auto it = proposal.mass.find(model.id(idx));
        if (it == proposal.mass.end() || !(it->second > 0.0))
            add(ViolationKind::MissingMass, model.id(idx),
                "proposal gives zero mass to '" + model.id(idx) +
                    "' which has positive operational mass");
    }
    return out;
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
    SCENREL_REQUIRE(!weights.empty(), ErrorCode::Domain, "sampler: no weights");
    cumulative_.reserve(weights.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        SCENREL_REQUIRE(weights[j] >= 0.0 && std::isfinite(weights[j]), ErrorCode::Domain,
                        "sampler: invalid weight");
        acc += weights[j];
        cumulative_.push_back(acc);
        if (weights[j] > 0.0) last_positive_ = j;
    }
    SCENREL_REQUIRE(acc > 0.0, ErrorCode::Domain, "sampler: all weights are zero");
}

std::size_t DiscreteSampler::draw(mc::RngStream& rng) const {
    const double x = rng.uniform01() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    if (it == cumulative_.end()) return last_positive_;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

ScenarioModel::ScenarioModel(ScenarioSpace space, OperationalProfile op) {
    const auto violations = validate_space(space, op);
    SCENREL_REQUIRE(violations.empty(), ErrorCode::Domain,
                    "invalid scenario space: " + join_messages(violations));

    ids_ = std::move(space.scenarios);
    members_.resize(space.n_subdomains);
    subdomain_.reserve(ids_.size());
    mass_.reserve(ids_.size());
    for (std::size_t j = 0; j < ids_.size(); ++j) {
        index_.emplace(ids_[j], j);
        const std::size_t sub = space.partition.at(ids_[j]) - 1;
        subdomain_.push_back(sub);
        members_[sub].push_back(j);
        mass_.push_back(op.mass.at(ids_[j]));
    }
    op_sampler_ = DiscreteSampler(mass_);
}

std::size_t ScenarioModel::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    SCENREL_REQUIRE(it != index_.end(), ErrorCode::Domain, "unknown scenario '" + id + "'");
    return it->second;
}

void ScenarioModel::check_subdomain(SubdomainId i) const {
    SCENREL_REQUIRE(i.value >= 1 && i.value <= members_.size(), ErrorCode::Domain,
                    "subdomain index " + std::to_string(i.value) + " out of range 1.." +
                        std::to_string(members_.size()));
}

std::span<const std::size_t> ScenarioModel::members(SubdomainId i) const {
    check_subdomain(i);
    return members_[i.value - 1];
}

std::vector<bool> ScenarioModel::region_mask(const FailureRegion& region) const {
    std::vector<bool> mask(ids_.size(), false);
    for (const auto& id : region.members) {
        const auto it = index_.find(id);
        SCENREL_REQUIRE(it != index_.end(), ErrorCode::Domain,
                        "failure region names unknown scenario '" + id + "'");
        mask[it->second] = true;
    }
    return mask;
}

double ScenarioModel::true_pfs(const FailureRegion& region) const {
    const auto mask = region_mask(region);
    double theta = 0.0;
    for (std::size_t j = 0; j < ids_.size(); ++j)
        if (mask[j]) theta += mass_[j];
    return std::clamp(theta, 0.0, 1.0);
}

double ScenarioModel::subdomain_mass(SubdomainId i) const {
    double m = 0.0;
    for (std::size_t j : members(i)) m += mass_[j];
    return m;
}

double ScenarioModel::conditional_pfs(const FailureRegion& region, SubdomainId i) const {
    const auto mask = region_mask(region);
    const double op_i = subdomain_mass(i);
    SCENREL_REQUIRE(op_i > 0.0, ErrorCode::UndefinedConditional,
                    "conditional pfs undefined: subdomain " + std::to_string(i.value) +
                        " has zero operational mass");
    double hit = 0.0;
    for (std::size_t j : members(i))
        if (mask[j]) hit += mass_[j];
    return std::clamp(hit / op_i, 0.0, 1.0);
}

double ScenarioModel::detection_rate(const FailureRegion& region, SubdomainId k) const {
    check_subdomain(k);
    for (const auto& id : region.members) {
        SCENREL_REQUIRE(subdomain_.at(index_of(id)) == k.value - 1, ErrorCode::Precondition,
                        "detection rate requires F within subdomain " + std::to_string(k.value) +
                            "; '" + id + "' lies outside");
    }
    const double op_k = subdomain_mass(k);
    SCENREL_REQUIRE(op_k > 0.0, ErrorCode::UndefinedConditional,
                    "detection rate undefined: subdomain has zero operational mass");
    return std::clamp(true_pfs(region) / op_k, 0.0, 1.0);
}

double ScenarioModel::total_probability_check(const FailureRegion& region) const {
    const double theta = true_pfs(region);
    double pooled = 0.0;
    for (std::size_t i = 1; i <= members_.size(); ++i) {
        const double op_i = subdomain_mass({i});
        if (op_i > 0.0) pooled += conditional_pfs(region, {i}) * op_i;
    }
    return std::abs(theta - pooled);
}

SubdomainSampler ScenarioModel::proposal_sampler(const ProposalDistribution& proposal) const {
    const auto violations = validate_proposal(*this, proposal);
    SCENREL_REQUIRE(violations.empty(), ErrorCode::Domain,
                    "invalid proposal: " + join_messages(violations));
    std::vector<std::size_t> idx;
    std::vector<double> w;
    for (std::size_t j : members(proposal.subdomain)) {
        const auto it = proposal.mass.find(ids_[j]);
        idx.push_back(j);
        w.push_back(it == proposal.mass.end() ? 0.0 : it->second);
    }
    return SubdomainSampler(std::move(idx), w);
}

SubdomainSampler ScenarioModel::conditional_sampler(SubdomainId i) const {
    const auto m = members(i);
    std::vector<std::size_t> idx(m.begin(), m.end());
    std::vector<double> w;
    w.reserve(idx.size());
    for (std::size_t j : idx) w.push_back(mass_[j]);
    SCENREL_REQUIRE(std::any_of(w.begin(), w.end(), [](double x) { return x > 0.0; }),
                    ErrorCode::UndefinedConditional,
                    "subdomain " + std::to_string(i.value) + " has zero operational mass");
    return SubdomainSampler(std::move(idx), w);
}

}  // namespace scenrel
