#include "scenrel/strategy_sim.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "scenrel/error.hpp"

namespace scenrel {

namespace {

constexpr double kTieTolerance = 1e-15;

void check_probability(double p, const char* name) {
    SCENREL_REQUIRE(p >= 0.0 && p <= 1.0, ErrorCode::Domain,
                    std::string(name) + " must lie in [0,1]");
}

// log (1−p)^n with 0·log 0 = 0.
double log_survival(double p, std::uint64_t n) {
    if (n == 0) return 0.0;
    return static_cast<double>(n) * std::log1p(-p);
}

double log_miss(std::span<const double> d, const Allocation& alloc) {
    SCENREL_REQUIRE(d.size() == alloc.per_subdomain.size(), ErrorCode::Domain,
                    "detection rates and allocation differ in length");
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        check_probability(d[i], "detection rate");
        acc += log_survival(d[i], alloc.per_subdomain[i]);
    }
    return acc;
}

StrategyComparison assemble(double q, double log_mile, double log_scenario) {
    StrategyComparison out;
    out.expected_pfs_mile = q * std::exp(log_mile);
    out.expected_pfs_scenario = q * std::exp(log_scenario);
    out.margin = out.expected_pfs_mile - out.expected_pfs_scenario;
    if (out.expected_pfs_scenario > 0.0)
        out.ratio = out.expected_pfs_mile / out.expected_pfs_scenario;

    if (q == 0.0 || log_mile == log_scenario) {
        out.superior = Verdict::Tie;
    } else if (std::isinf(log_mile) || std::isinf(log_scenario)) {
        out.superior = log_mile < log_scenario ? Verdict::Mile : Verdict::Scenario;
    } else {
        const double diff = log_mile - log_scenario;
        if (std::abs(diff) <= kTieTolerance)
            out.superior = Verdict::Tie;
        else
            out.superior = diff > 0.0 ? Verdict::Scenario : Verdict::Mile;
    }
    return out;
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Mile: return "mile";
        case Verdict::Scenario: return "scenario";
        case Verdict::Tie: return "tie";
    }
    return "tie";
}

std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::ScenarioFavoured: return "op_dk_much_less_than_1_over_n";
        case Regime::MileFavoured: return "op_dk_much_greater_than_1_over_n";
        case Regime::Neither: return "neither";
    }
    return "neither";
}

std::uint64_t Allocation::total() const noexcept {
    return std::accumulate(per_subdomain.begin(), per_subdomain.end(), std::uint64_t{0});
}

Allocation allocate_budget(std::uint64_t t, std::size_t n, const AllocationPolicy& policy) {
    SCENREL_REQUIRE(n >= 1, ErrorCode::Domain, "allocation needs at least one subdomain");
    Allocation alloc;
    if (const auto* explicit_list = std::get_if<std::vector<std::uint64_t>>(&policy)) {
        SCENREL_REQUIRE(explicit_list->size() == n, ErrorCode::Domain,
                        "explicit allocation has " + std::to_string(explicit_list->size()) +
                            " entries for " + std::to_string(n) + " subdomains");
        alloc.per_subdomain = *explicit_list;
        SCENREL_REQUIRE(alloc.total() == t, ErrorCode::Domain,
                        "explicit allocation sums to " + std::to_string(alloc.total()) +
                            ", expected " + std::to_string(t));
        return alloc;
    }
    const std::uint64_t base = t / n;
    const std::uint64_t remainder = t % n;
    alloc.per_subdomain.assign(n, base);
    for (std::uint64_t i = 0; i < remainder; ++i) ++alloc.per_subdomain[i];
    return alloc;
}

double expected_pfs_after_mile(double q, std::uint64_t t) {
    check_probability(q, "q");
    return q * std::exp(log_survival(q, t));
}

DetectionProbability scenario_detection_probability(std::span<const double> d,
                                                    const Allocation& alloc) {
    const double miss = std::exp(log_miss(d, alloc));
    return {1.0 - miss, miss};
}

double expected_pfs_after_scenario(double q, std::span<const double> d, const Allocation& alloc) {
    check_probability(q, "q");
    return q * scenario_detection_probability(d, alloc).p_miss;
}

StrategyComparison compare_closed_forms(double q, std::uint64_t t, std::span<const double> d,
                                        const Allocation& alloc) {
    check_probability(q, "q");
    return assemble(q, log_survival(q, t), log_miss(d, alloc));
}

StrategyComparison uniform_spread_verdict(double q, double d_bar, std::uint64_t t) {
    check_probability(q, "q");
    check_probability(d_bar, "mean detection rate");
    return assemble(q, log_survival(q, t), log_survival(d_bar, t));
}

SingleRegionModel::SingleRegionModel(ScenarioModel space, FailureRegion region,
                                     std::vector<ProposalDistribution> generators)
    : space_(std::move(space)), region_(std::move(region)) {
    mask_ = space_.region_mask(region_);
    q_ = space_.true_pfs(region_);

    const std::size_t n = space_.n_subdomains();
    std::vector<const ProposalDistribution*> chosen(n, nullptr);
    for (const auto& g : generators) {
        SCENREL_REQUIRE(g.subdomain.value >= 1 && g.subdomain.value <= n, ErrorCode::Domain,
                        "generator subdomain out of range");
        SCENREL_REQUIRE(chosen[g.subdomain.value - 1] == nullptr, ErrorCode::Domain,
                        "more than one generator for subdomain " +
                            std::to_string(g.subdomain.value));
        chosen[g.subdomain.value - 1] = &g;
    }

    d_.assign(n, 0.0);
    generators_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SubdomainId id{i + 1};
        if (chosen[i] != nullptr) {
            generators_[i] = space_.proposal_sampler(*chosen[i]);
            double hit = 0.0;
            for (const auto& [sid, p] : chosen[i]->mass)
                if (mask_[space_.index_of(sid)]) hit += p;
            d_[i] = std::min(hit, 1.0);
        } else if (space_.subdomain_mass(id) > 0.0) {
            generators_[i] = space_.conditional_sampler(id);
            d_[i] = space_.conditional_pfs(region_, id);
        }
    }
}

ConcentratedAnalysis concentrated_region_analysis(const SingleRegionModel& model, SubdomainId k,
                                                  std::uint64_t t,
                                                  const AllocationPolicy& policy) {
    const auto& space = model.space();
    ConcentratedAnalysis out;
    out.k = k;
    out.d_k = space.detection_rate(model.region(), k);  // enforces F ⊆ D_k
    out.op_dk = space.subdomain_mass(k);
    const auto n = static_cast<double>(space.n_subdomains());
    out.inv_n = 1.0 / n;
    out.q = model.q();

    constexpr double kFactor = 10.0;
    constexpr double kSlack = 1e-12;
    if (out.op_dk * kFactor <= out.inv_n * (1.0 + kSlack))
        out.regime = Regime::ScenarioFavoured;
    else if (out.op_dk * (1.0 + kSlack) >= kFactor * out.inv_n)
        out.regime = Regime::MileFavoured;
    else
        out.regime = Regime::Neither;

    out.allocation = allocate_budget(t, space.n_subdomains(), policy);
    out.comparison = compare_strategies(model, t, out.allocation);
    out.linear_approximation = out.q * (1.0 - static_cast<double>(t) * out.q);
    out.approximation_gap =
        std::abs(out.comparison.expected_pfs_scenario - out.linear_approximation);
    return out;
}

StrategyComparison compare_strategies(const SingleRegionModel& model, std::uint64_t t,
                                      const Allocation& alloc) {
    return compare_closed_forms(model.q(), t, model.detection_rates(), alloc);
}

mc::EmpiricalEstimate simulate_debug_campaign(const SingleRegionModel& model,
                                              const Strategy& strategy, std::uint64_t t,
                                              std::size_t replicates, std::uint64_t master_seed,
                                              unsigned workers) {
    const double q = model.q();
    const mc::SeedPolicy policy{master_seed};

    if (std::holds_alternative<MileStrategy>(strategy)) {
        const auto& space = model.space();
        auto task = [&](mc::RngStream& rng) {
            for (std::uint64_t s = 0; s < t; ++s)
                if (model.in_region(space.sample_operational(rng))) return 0.0;
            return q;
        };
        return mc::run_replicated(task, replicates, policy, workers);
    }

    const auto& alloc = std::get<ScenarioStrategy>(strategy).allocation;
    SCENREL_REQUIRE(alloc.per_subdomain.size() == model.space().n_subdomains(), ErrorCode::Domain,
                    "allocation length does not match the number of subdomains");
    SCENREL_REQUIRE(alloc.total() == t, ErrorCode::Domain,
                    "allocation total differs from the test budget");
    for (std::size_t i = 0; i < alloc.per_subdomain.size(); ++i) {
        SCENREL_REQUIRE(alloc.per_subdomain[i] == 0 || model.generator({i + 1}).has_value(),
                        ErrorCode::Domain,
                        "tests allocated to subdomain " + std::to_string(i + 1) +
                            " which has no generator (zero operational mass, no proposal)");
    }
    auto task = [&](mc::RngStream& rng) {
        for (std::size_t i = 0; i < alloc.per_subdomain.size(); ++i) {
            if (alloc.per_subdomain[i] == 0) continue;
            const auto& gen = *model.generator({i + 1});
            for (std::uint64_t s = 0; s < alloc.per_subdomain[i]; ++s)
                if (model.in_region(gen.draw(rng))) return 0.0;
        }
        return q;
    };
    return mc::run_replicated(task, replicates, policy, workers);
}

SingleRegionModel make_uniform_spread_model(double q, double d_bar, std::size_t n) {
    check_probability(q, "q");
    check_probability(d_bar, "mean detection rate");
    SCENREL_REQUIRE(n >= 1, ErrorCode::Domain, "need at least one subdomain");
    ScenarioSpace space;
    OperationalProfile op;
    FailureRegion region;
    std::vector<ProposalDistribution> generators;
    space.n_subdomains = n;
    const double share = 1.0 / static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const std::string f = "f" + std::to_string(i);
        const std::string g = "g" + std::to_string(i);
        space.scenarios.push_back(f);
        space.scenarios.push_back(g);
        space.partition[f] = i;
        space.partition[g] = i;
        op.mass[f] = q * share;
        op.mass[g] = (1.0 - q) * share;
        region.members.insert(f);
        generators.push_back({SubdomainId{i}, {{f, d_bar}, {g, 1.0 - d_bar}}});
    }
    return SingleRegionModel(ScenarioModel(std::move(space), std::move(op)), std::move(region),
                             std::move(generators));
}

SingleRegionModel make_concentrated_model(double q, double op_dk, std::size_t n, SubdomainId k) {
    check_probability(q, "q");
    check_probability(op_dk, "Op(D_k)");
    SCENREL_REQUIRE(q <= op_dk, ErrorCode::Domain, "failure mass exceeds the subdomain mass");
    SCENREL_REQUIRE(n >= 1 && k.value >= 1 && k.value <= n, ErrorCode::Domain,
                    "subdomain index out of range");
    SCENREL_REQUIRE(n > 1 || op_dk == 1.0, ErrorCode::Domain,
                    "a single subdomain must carry all operational mass");
    ScenarioSpace space;
    OperationalProfile op;
    space.n_subdomains = n;
    const double other = n > 1 ? (1.0 - op_dk) / static_cast<double>(n - 1) : 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i == k.value) {
            space.scenarios.insert(space.scenarios.end(), {"f", "g"});
            space.partition["f"] = i;
            space.partition["g"] = i;
            op.mass["f"] = q;
            op.mass["g"] = op_dk - q;
        } else {
            const std::string o = "o" + std::to_string(i);
            space.scenarios.push_back(o);
            space.partition[o] = i;
            op.mass[o] = other;
        }
    }
    return SingleRegionModel(ScenarioModel(std::move(space), std::move(op)), FailureRegion{{"f"}});
}

}  // namespace scenrel
