#include "scenrel/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "scenrel/io.hpp"
#include "scenrel/mc_harness.hpp"
#include "scenrel/strategy_sim.hpp"
#include "scenrel/workflow.hpp"

namespace scenrel::cli {

namespace {

using nlohmann::json;

json campaign_json(const CampaignOutcome& c) { return json{{"t", c.t}, {"k", c.k}}; }

json pair_json(const PairedCampaigns& p) {
    return json{{"real", campaign_json(p.real)}, {"synthetic", campaign_json(p.synthetic)}};
}

json estimate_json(const mc::EmpiricalEstimate& e) {
    return json{{"mean", e.mean}, {"standard_error", e.standard_error}, {"replicates", e.replicates}};
}

json comparison_json(const StrategyComparison& c) {
    json j{{"expected_pfs_mile", c.expected_pfs_mile},
           {"expected_pfs_scenario", c.expected_pfs_scenario},
           {"verdict", to_string(c.superior)},
           {"margin_difference", c.margin}};
    j["margin_ratio"] = c.ratio ? json(*c.ratio) : json(nullptr);
    return j;
}

json assessment_json(const RefAssessment& a) {
    json j{{"epsilon", a.criterion.epsilon},
           {"alpha", a.criterion.alpha},
           {"tolerance_mode", a.criterion.mode == ToleranceMode::Relative ? "relative" : "absolute"},
           {"effective_epsilon", a.effective_epsilon},
           {"mu", a.delta.mu},
           {"sigma", a.delta.sigma},
           {"coverage", a.coverage},
           {"certified", a.certified},
           {"degenerate", a.delta.degenerate}};
    j["epsilon_star"] = a.epsilon_star ? json(*a.epsilon_star) : json(nullptr);
    return j;
}

void delta_warnings(const DeltaDistribution& d, Report& report) {
    if (d.real_small_sample)
        report.warnings.push_back(
            "real campaign has fewer than 5 failures or passes; the Gaussian approximation is unreliable");
    if (d.synthetic_small_sample)
        report.warnings.push_back(
            "synthetic campaign has fewer than 5 failures or passes; the Gaussian approximation is unreliable");
    if (d.degenerate)
        report.warnings.push_back("sigma is zero; certification reduces to |mu| <= epsilon");
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name,
                          Report& report) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path);
    SCENREL_REQUIRE(out.good(), ErrorCode::Config, "cannot write '" + path.string() + "'");
    report.files.push_back(path);
    return out;
}

// --- sweep configuration -------------------------------------------------

[[noreturn]] void config_error(const std::string& msg) {
    throw Error(ErrorCode::Config, "sweep config: " + msg);
}

std::vector<double> grid_values(const json& section, const char* key) {
    if (!section.contains(key)) config_error(std::string("missing grid '") + key + "'");
    const auto& g = section.at(key);
    if (!g.is_array()) config_error(std::string("grid '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& v : g) {
        if (!v.is_number()) config_error(std::string("grid '") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::uint64_t> count_values(const json& section, const char* key, std::uint64_t min) {
    std::vector<std::uint64_t> out;
    for (double v : grid_values(section, key)) {
        if (v < static_cast<double>(min) || v != std::floor(v))
            config_error(std::string("grid '") + key + "' needs integers >= " + std::to_string(min));
        out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
}

void check_unit(const std::vector<double>& values, const char* key) {
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) config_error(std::string("grid '") + key + "' values must lie in [0,1]");
}

struct SweepRow {
    std::size_t id = 0;
    json params;
    StrategyComparison comparison;
    std::optional<mc::EmpiricalEstimate> mc_scenario;
    std::optional<mc::EmpiricalEstimate> mc_mile;
};

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Parse: return kExitParse;
        case ErrorCode::Domain:
        case ErrorCode::Precondition:
        case ErrorCode::UndefinedConditional: return kExitDomain;
        case ErrorCode::InsufficientData: return kExitInsufficientData;
        case ErrorCode::Transition: return kExitTransition;
        case ErrorCode::Config: return kExitConfig;
        case ErrorCode::NumericalDegeneracy: return kExitNumerical;
    }
    return kExitDomain;
}

json Report::to_json() const {
    json j;
    j["tool"] = "scenrel";
    j["version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["inputs"] = inputs;
    j["results"] = results;
    j["warnings"] = warnings;
    json f = json::array();
    for (const auto& p : files) f.push_back(p.string());
    j["files"] = f;
    return j;
}

std::string format_probability(double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

std::filesystem::path write_report(const Report& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::string name = report.subcommand;
    for (char& c : name)
        if (c == ' ') c = '_';
    const auto path = out_dir / (name + "_report.json");
    std::ofstream out(path);
    SCENREL_REQUIRE(out.good(), ErrorCode::Config, "cannot write '" + path.string() + "'");
    out << report.to_json().dump(2) << '\n';
    return path;
}

CampaignOutcome parse_counts(std::string_view text) {
    const auto colon = text.find(':');
    SCENREL_REQUIRE(colon != std::string_view::npos, ErrorCode::Config,
                    "campaign counts must look like T:K, got '" + std::string(text) + "'");
    try {
        std::size_t used_t = 0, used_k = 0;
        const std::string ts(text.substr(0, colon)), ks(text.substr(colon + 1));
        const auto t = std::stoull(ts, &used_t);
        const auto k = std::stoull(ks, &used_k);
        if (used_t != ts.size() || used_k != ks.size()) throw std::invalid_argument("trailing");
        return CampaignOutcome(t, k);
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(ErrorCode::Config, "campaign counts must look like T:K, got '" + std::string(text) + "'");
    }
}

Report cmd_estimate(const EstimateConfig& config) {
    Report report;
    report.subcommand = "estimate";
    report.inputs["campaign"] = config.campaign.string();
    report.inputs["confidence"] = config.confidence;
    if (config.prior) report.inputs["prior"] = config.prior->string();
    if (config.space) report.inputs["space"] = config.space->string();

    const auto log = load_campaign_log(config.campaign);
    const auto overall = log.overall();
    SCENREL_REQUIRE(overall.t >= 1, ErrorCode::InsufficientData,
                    config.campaign.string() + ": campaign log has no test records");

    const auto ci = wald_confidence_interval(overall, config.confidence);
    json o = campaign_json(overall);
    o["mle"] = mle_pfs(overall);
    o["wald_variance"] = wald_variance(overall);
    o["wald_interval"] = {{"lo", ci.lo}, {"hi", ci.hi}, {"z", ci.z},
                          {"standard_error", ci.standard_error},
                          {"small_sample_warning", ci.small_sample_warning}};
    if (ci.small_sample_warning)
        report.warnings.push_back("fewer than 5 failures or passes; the Wald interval is unreliable");
    if (config.prior) {
        const auto post = posterior_mean(overall, load_prior(*config.prior));
        o["posterior"] = {{"mean", post.mean},
                          {"method", post.method == PosteriorMethod::Quadrature ? "quadrature"
                                                                                : "closed-form-conjugate"},
                          {"quadrature_error", post.quadrature_error}};
    }
    report.results["overall"] = o;

    json per = json::array();
    const auto by_sub = log.per_subdomain();
    for (const auto& [sub, c] : by_sub) {
        json row = campaign_json(c);
        row["subdomain"] = sub;
        row["mle"] = mle_pfs(c);
        per.push_back(row);
    }
    report.results["per_subdomain"] = per;

    if (config.space) {
        const auto doc = load_scenario_document(*config.space);
        const auto& model = doc.model;
        for (const auto& rec : log.records) {
            const std::string where = config.campaign.string() + ":" + std::to_string(rec.line) + ": ";
            SCENREL_REQUIRE(model.contains(rec.scenario_id), ErrorCode::Domain,
                            where + "scenario '" + rec.scenario_id + "' is not in the scenario space");
            SCENREL_REQUIRE(model.subdomain_of(model.index_of(rec.scenario_id)).value == rec.subdomain,
                            ErrorCode::Domain,
                            where + "scenario '" + rec.scenario_id +
                                "' is logged under the wrong subdomain");
        }
        std::vector<double> theta, mass;
        for (std::size_t i = 1; i <= model.n_subdomains(); ++i) {
            const double op_i = model.subdomain_mass({i});
            const auto it = by_sub.find(i);
            if (it == by_sub.end()) {
                SCENREL_REQUIRE(op_i == 0.0, ErrorCode::InsufficientData,
                                "subdomain " + std::to_string(i) +
                                    " has operational mass but no tests; cannot pool");
                theta.push_back(0.0);
            } else {
                theta.push_back(mle_pfs(it->second));
            }
            mass.push_back(op_i);
        }
        report.results["pooled"] = {{"theta", pooled_total_pfs(theta, mass)},
                                    {"subdomain_estimates", theta},
                                    {"subdomain_masses", mass}};
    }
    return report;
}

Report cmd_compare(const CompareConfig& config) {
    Report report;
    report.subcommand = "compare";
    report.seed = config.seed;
    report.inputs["config"] = config.sweep.string();
    report.inputs["monte_carlo"] = config.monte_carlo;

    const std::string text = read_text_file(config.sweep);
    json sweep;
    try {
        sweep = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw Error(ErrorCode::Parse, config.sweep.string() + ": " + ex.what());
    }
    if (!sweep.is_object()) config_error("top level must be an object");
    report.inputs["sweep"] = sweep;
    const std::size_t replicates = sweep.value("replicates", std::size_t{100000});
    if (replicates == 0) config_error("replicates must be >= 1");

    std::vector<SweepRow> rows;
    auto run_mc = [&](SweepRow& row, const SingleRegionModel& model, const Allocation& alloc,
                      std::uint64_t t) {
        const auto seed = mc::derive_seed(config.seed, row.id);
        row.mc_scenario = simulate_debug_campaign(model, ScenarioStrategy{alloc}, t, replicates,
                                                  seed, config.workers);
        row.mc_mile = simulate_debug_campaign(model, MileStrategy{}, t, replicates,
                                              mc::derive_seed(seed, 1), config.workers);
    };

    if (sweep.contains("uniform_spread")) {
        const auto& g = sweep.at("uniform_spread");
        const auto qs = grid_values(g, "q");
        const auto ds = grid_values(g, "d_bar");
        check_unit(qs, "q");
        check_unit(ds, "d_bar");
        const auto ns = count_values(g, "n", 1);
        const auto ts = count_values(g, "t", 0);
        for (double q : qs)
            for (double d : ds)
                for (auto n : ns)
                    for (auto t : ts) {
                        SweepRow row;
                        row.id = rows.size() + 1;
                        row.params = {{"family", "uniform_spread"}, {"q", q}, {"d_bar", d},
                                      {"n", n}, {"t", t}};
                        row.comparison = uniform_spread_verdict(q, d, t);
                        if (config.monte_carlo) {
                            try {
                                const auto model = make_uniform_spread_model(q, d, n);
                                run_mc(row, model, allocate_budget(t, n, EqualSplit{}), t);
                            } catch (const Error& ex) {
                                report.warnings.push_back("config " + std::to_string(row.id) +
                                                          ": no Monte Carlo model: " + ex.what());
                            }
                        }
                        rows.push_back(std::move(row));
                    }
    }

    if (sweep.contains("concentrated")) {
        const auto& g = sweep.at("concentrated");
        const auto qs = grid_values(g, "q");
        const auto ops = grid_values(g, "op_dk");
        check_unit(qs, "q");
        check_unit(ops, "op_dk");
        const auto ns = count_values(g, "n", 1);
        const auto ts = count_values(g, "t", 0);
        const std::size_t k = g.value("k", std::size_t{1});
        AllocationPolicy policy = EqualSplit{};
        if (sweep.contains("allocation")) {
            const auto& a = sweep.at("allocation");
            if (a.is_array())
                policy = a.get<std::vector<std::uint64_t>>();
            else if (!(a.is_string() && a.get<std::string>() == "equal"))
                config_error("allocation must be \"equal\" or an explicit list");
        }
        for (double q : qs)
            for (double op_dk : ops)
                for (auto n : ns)
                    for (auto t : ts) {
                        SweepRow row;
                        row.id = rows.size() + 1;
                        row.params = {{"family", "concentrated"}, {"q", q}, {"op_dk", op_dk},
                                      {"n", n}, {"t", t}, {"k", k}};
                        try {
                            const auto model = make_concentrated_model(q, op_dk, n, {k});
                            const auto a = concentrated_region_analysis(model, {k}, t, policy);
                            row.comparison = a.comparison;
                            row.params["d_k"] = a.d_k;
                            row.params["regime"] = to_string(a.regime);
                            report.warnings.push_back("config " + std::to_string(row.id) + ": regime " +
                                                      std::string(to_string(a.regime)) +
                                                      " (label only; the verdict uses exact values)");
                            row.params["allocation"] = a.allocation.per_subdomain;
                            row.params["linear_approximation"] = a.linear_approximation;
                            row.params["approximation_gap"] = a.approximation_gap;
                            if (config.monte_carlo) run_mc(row, model, a.allocation, t);
                        } catch (const Error& ex) {
                            config_error("config " + std::to_string(row.id) + ": " + ex.what());
                        }
                        rows.push_back(std::move(row));
                    }
    }

    auto out = open_output(config.out_dir, "compare.csv", report);
    out << kCompareHeader << '\n';
    json results = json::array();
    for (const auto& row : rows) {
        out << row.id << ',' << format_probability(row.comparison.expected_pfs_mile) << ','
            << format_probability(row.comparison.expected_pfs_scenario) << ','
            << to_string(row.comparison.superior) << ',';
        if (row.mc_scenario)
            out << format_probability(row.mc_scenario->mean) << ','
                << format_probability(row.mc_scenario->standard_error) << ','
                << format_probability(row.mc_mile->mean) << ','
                << format_probability(row.mc_mile->standard_error);
        else
            out << ",,,";
        out << '\n';

        json r{{"config_id", row.id}, {"params", row.params},
               {"comparison", comparison_json(row.comparison)}};
        if (row.mc_scenario) {
            r["mc_scenario"] = estimate_json(*row.mc_scenario);
            r["mc_mile"] = estimate_json(*row.mc_mile);
        }
        results.push_back(r);
    }
    report.results["rows"] = results;
    return report;
}

Report cmd_ref_certify(const CertifyConfig& config) {
    Report report;
    report.subcommand = "ref certify";
    report.inputs = pair_json(config.pair);
    const auto a = certify_ref(config.pair, config.criterion);
    report.results = assessment_json(a);
    report.results["theta_r"] = mle_pfs(config.pair.real);
    report.results["theta_s"] = mle_pfs(config.pair.synthetic);
    delta_warnings(a.delta, report);
    if (config.criterion.mode == ToleranceMode::Relative)
        report.warnings.push_back("relative tolerance: epsilon is scaled by the real-world estimate");
    return report;
}

Report cmd_ref_epsilon_star(const EpsilonStarConfig& config) {
    Report report;
    report.subcommand = "ref epsilon-star";
    report.inputs = pair_json(config.pair);
    report.inputs["alpha"] = config.alpha;
    const auto delta = delta_distribution(config.pair);
    const double eps = smallest_certifiable_epsilon(delta, config.alpha);
    report.results = {{"epsilon_star", eps}, {"mu", delta.mu}, {"sigma", delta.sigma},
                      {"coverage_at_epsilon_star", ref_coverage(delta, eps)}};
    delta_warnings(delta, report);
    return report;
}

Report cmd_ref_workflow(const WorkflowCliConfig& config) {
    Report report;
    report.subcommand = "ref workflow";
    report.inputs["log"] = config.log.string();
    if (config.event) report.inputs["event"] = *config.event;
    if (config.campaign) report.inputs["campaign"] = campaign_json(*config.campaign);

    std::optional<WorkflowState> state;
    if (std::filesystem::exists(config.log) && std::filesystem::file_size(config.log) > 0) {
        std::ifstream in(config.log);
        state = replay_history(in);
        report.results["replayed_entries"] = state->history().size();
    } else {
        state.emplace(WorkflowConfig{config.criterion, config.growth_threshold, 0.95});
        report.results["replayed_entries"] = 0;
    }

    if (config.event) {
        const WorkflowEvent ev{parse_event(*config.event), config.campaign};
        auto next = workflow_step(*state, ev, config.timestamp.value_or(utc_timestamp()));
        std::ofstream out(config.log, std::ios::app);
        SCENREL_REQUIRE(out.good(), ErrorCode::Config, "cannot append to '" + config.log.string() + "'");
        out << serialize_entry(next.history().back(), next.config()) << '\n';
        state = std::move(next);
        report.results["appended"] = json::parse(serialize_entry(state->history().back(), state->config()));
    }

    report.results["phase"] = to_string(state->phase());
    report.results["history_length"] = state->history().size();
    report.results["fidelity_limit_step_skipped"] = !state->visited(Phase::QuantifyFidelityLimit);
    report.results["epsilon"] = state->config().criterion.epsilon;
    report.results["alpha"] = state->config().criterion.alpha;
    if (const auto& a = state->last_assessment()) {
        report.results["last_assessment"] = assessment_json(*a);
        delta_warnings(a->delta, report);
    }
    return report;
}

Report cmd_ref_oc(const OcConfig& config) {
    Report report;
    report.subcommand = "ref oc";
    report.seed = config.seed;
    report.inputs = {{"theta_r", config.theta_r}, {"theta_s", config.theta_s},
                     {"t_r", config.t_r}, {"t_s", config.t_s},
                     {"epsilon", config.criterion.epsilon}, {"alpha", config.criterion.alpha},
                     {"replicates", config.replicates}};
    const auto rate = ref_operating_characteristics(config.theta_r, config.theta_s, config.t_r,
                                                    config.t_s, config.criterion,
                                                    config.replicates, config.seed, config.workers);
    report.results = {{"certification_rate", rate.mean},
                      {"standard_error", rate.standard_error},
                      {"replicates", rate.replicates}};
    return report;
}

Report cmd_report_plots(const PlotsConfig& config) {
    Report report;
    report.subcommand = "plots";
    if (config.coverage_pair) {
        SCENREL_REQUIRE(config.points >= 2, ErrorCode::Config, "plots need at least 2 points");
        SCENREL_REQUIRE(config.epsilon_max > 0.0, ErrorCode::Config, "epsilon_max must be positive");
        report.inputs["coverage"] = pair_json(*config.coverage_pair);
        report.inputs["epsilon_max"] = config.epsilon_max;
        report.inputs["points"] = config.points;
        report.inputs["alpha"] = config.alpha;
        const auto delta = delta_distribution(*config.coverage_pair);
        auto out = open_output(config.out_dir, "coverage_vs_epsilon.csv", report);
        out << "epsilon,coverage\n";
        for (std::size_t i = 0; i < config.points; ++i) {
            const double eps = config.epsilon_max * static_cast<double>(i) /
                               static_cast<double>(config.points - 1);
            out << format_probability(eps) << ',' << format_probability(ref_coverage(delta, eps))
                << '\n';
        }
        report.results["epsilon_star"] = smallest_certifiable_epsilon(delta, config.alpha);
        report.results["target_coverage"] = 1.0 - config.alpha;
    }
    if (config.pfs_q) {
        report.inputs["q"] = *config.pfs_q;
        report.inputs["t_max"] = config.t_max;
        if (config.pfs_d_bar) report.inputs["d_bar"] = *config.pfs_d_bar;
        auto out = open_output(config.out_dir, "pfs_vs_t.csv", report);
        out << "t,e_pfs_mile" << (config.pfs_d_bar ? ",e_pfs_scenario" : "") << '\n';
        for (std::uint64_t t = 0; t <= config.t_max; ++t) {
            out << t << ',' << format_probability(expected_pfs_after_mile(*config.pfs_q, t));
            if (config.pfs_d_bar)
                out << ','
                    << format_probability(
                           uniform_spread_verdict(*config.pfs_q, *config.pfs_d_bar, t)
                               .expected_pfs_scenario);
            out << '\n';
        }
    }
    return report;
}

}  // namespace scenrel::cli
