#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scenrel/cli.hpp"
#include "scenrel/io.hpp"

namespace {

using namespace scenrel;

struct CampaignInput {
    std::string file;
    std::string counts;

    bool given() const { return !file.empty() || !counts.empty(); }

    CampaignOutcome resolve(const char* what) const {
        SCENREL_REQUIRE(given(), ErrorCode::Config, std::string("missing ") + what + " campaign");
        SCENREL_REQUIRE(file.empty() || counts.empty(), ErrorCode::Config,
                        std::string("give either a file or counts for the ") + what + " campaign");
        if (!counts.empty()) return cli::parse_counts(counts);
        return load_campaign_log(file).overall();
    }
};

void add_campaign(CLI::App* app, CampaignInput& in, const std::string& name) {
    app->add_option("--" + name, in.file, name + " campaign log (scenario_id,subdomain,outcome)")
        ->check(CLI::ExistingFile);
    app->add_option("--" + name + "-counts", in.counts, name + " campaign as T:K");
}

void add_criterion(CLI::App* app, RefCriterion& c, bool& relative) {
    app->add_option("--epsilon", c.epsilon, "tolerance epsilon")->capture_default_str();
    app->add_option("--alpha", c.alpha, "significance level alpha")->capture_default_str();
    app->add_flag("--relative", relative, "interpret epsilon relative to the real-world estimate");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario-based reliability statistics for automated driving testing"};
    app.set_version_flag("--version", std::string(cli::kToolVersion));
    app.set_config("--config", "", "read options from an INI/TOML file");
    app.require_subcommand(1);

    std::uint64_t seed = cli::kDefaultSeed;
    std::string out_dir;
    unsigned workers = 0;
    app.add_option("--seed", seed, "master seed for Monte Carlo work")->capture_default_str();
    app.add_option("--out-dir", out_dir, "directory for output files");
    app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)");

    // estimate
    cli::EstimateConfig est;
    std::string est_prior, est_space;
    auto* estimate = app.add_subcommand("estimate", "pfs estimates from a campaign log");
    estimate->add_option("campaign", est.campaign, "campaign log CSV")->required()->check(CLI::ExistingFile);
    estimate->add_option("--prior", est_prior, "prior file (JSON)")->check(CLI::ExistingFile);
    estimate->add_option("--space", est_space, "scenario space file for per-subdomain pooling")
        ->check(CLI::ExistingFile);
    estimate->add_option("--confidence", est.confidence, "Wald interval confidence")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    // compare
    cli::CompareConfig cmp;
    auto* compare = app.add_subcommand("compare", "mile-based versus scenario-based testing sweep");
    compare->add_option("sweep", cmp.sweep, "sweep config (JSON)")->required();
    compare->add_flag("--mc", cmp.monte_carlo, "append Monte Carlo columns");

    // ref
    auto* ref = app.add_subcommand("ref", "reliability-equivalence-factor certification");
    ref->require_subcommand(1);

    CampaignInput cert_real, cert_syn;
    RefCriterion cert_crit;
    bool cert_rel = false;
    auto* certify = ref->add_subcommand("certify", "certify a paired campaign");
    add_campaign(certify, cert_real, "real");
    add_campaign(certify, cert_syn, "synthetic");
    add_criterion(certify, cert_crit, cert_rel);

    CampaignInput es_real, es_syn;
    double es_alpha = 0.05;
    auto* eps_star = ref->add_subcommand("epsilon-star", "smallest certifiable epsilon");
    add_campaign(eps_star, es_real, "real");
    add_campaign(eps_star, es_syn, "synthetic");
    eps_star->add_option("--alpha", es_alpha, "significance level alpha")->capture_default_str();

    cli::WorkflowCliConfig wf;
    std::string wf_event, wf_timestamp;
    CampaignInput wf_campaign;
    bool wf_rel = false;
    auto* workflow = ref->add_subcommand("workflow", "replay and advance the persisted certification workflow");
    workflow->add_option("--log", wf.log, "workflow log (JSON lines)")->required();
    workflow->add_option("--event", wf_event,
                         "collect_real|generate_synthetic|certify|increase_synthetic|reconfigure|"
                         "declare_exhausted|quantify_limit|scale_up|new_real");
    add_campaign(workflow, wf_campaign, "campaign");
    add_criterion(workflow, wf.criterion, wf_rel);
    workflow->add_option("--growth-threshold", wf.growth_threshold,
                         "minimum relative sigma reduction that justifies growing the synthetic campaign")
        ->capture_default_str();
    workflow->add_option("--timestamp", wf_timestamp, "timestamp recorded with the event");

    cli::OcConfig oc;
    bool oc_rel = false;
    auto* ocs = ref->add_subcommand("oc", "certification rate by simulation");
    ocs->add_option("--theta-r", oc.theta_r, "true real-world pfs")->required()->check(CLI::Range(0.0, 1.0));
    ocs->add_option("--theta-s", oc.theta_s, "true simulated pfs")->required()->check(CLI::Range(0.0, 1.0));
    ocs->add_option("--t-r", oc.t_r, "real-world tests per replicate")->required();
    ocs->add_option("--t-s", oc.t_s, "synthetic tests per replicate")->required();
    ocs->add_option("--replicates", oc.replicates, "replicates")->capture_default_str();
    add_criterion(ocs, oc.criterion, oc_rel);

    // plots
    cli::PlotsConfig plots;
    CampaignInput pl_real, pl_syn;
    double pl_q = -1.0, pl_d = -1.0;
    auto* plot = app.add_subcommand("plots", "plot-ready CSV series");
    add_campaign(plot, pl_real, "real");
    add_campaign(plot, pl_syn, "synthetic");
    plot->add_option("--alpha", plots.alpha, "significance level for epsilon-star")->capture_default_str();
    plot->add_option("--epsilon-max", plots.epsilon_max, "largest epsilon on the coverage curve")
        ->capture_default_str();
    plot->add_option("--points", plots.points, "points on the coverage curve")->capture_default_str();
    plot->add_option("--q", pl_q, "failure-region mass for the E[pfs]-vs-t curve")
        ->check(CLI::Range(0.0, 1.0));
    plot->add_option("--d-bar", pl_d, "uniform detection rate for the scenario-based curve")
        ->check(CLI::Range(0.0, 1.0));
    plot->add_option("--t-max", plots.t_max, "last t on the E[pfs]-vs-t curve")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::kExitOk : cli::kExitUsage;
    }

    try {
        cli::Report report;
        bool always_write = false;
        if (*estimate) {
            if (!est_prior.empty()) est.prior = est_prior;
            if (!est_space.empty()) est.space = est_space;
            report = cli::cmd_estimate(est);
        } else if (*compare) {
            cmp.seed = seed;
            cmp.workers = workers;
            cmp.out_dir = out_dir.empty() ? "." : out_dir;
            report = cli::cmd_compare(cmp);
            always_write = true;
        } else if (*certify) {
            if (cert_rel) cert_crit.mode = ToleranceMode::Relative;
            report = cli::cmd_ref_certify(
                {{cert_real.resolve("real"), cert_syn.resolve("synthetic")}, cert_crit});
        } else if (*eps_star) {
            report = cli::cmd_ref_epsilon_star(
                {{es_real.resolve("real"), es_syn.resolve("synthetic")}, es_alpha});
        } else if (*workflow) {
            if (wf_rel) wf.criterion.mode = ToleranceMode::Relative;
            if (!wf_event.empty()) wf.event = wf_event;
            if (wf_campaign.given()) wf.campaign = wf_campaign.resolve("event");
            if (!wf_timestamp.empty()) wf.timestamp = wf_timestamp;
            report = cli::cmd_ref_workflow(wf);
        } else if (*ocs) {
            if (oc_rel) oc.criterion.mode = ToleranceMode::Relative;
            oc.seed = seed;
            oc.workers = workers;
            report = cli::cmd_ref_oc(oc);
        } else if (*plot) {
            plots.out_dir = out_dir.empty() ? "." : out_dir;
            if (pl_real.given() || pl_syn.given())
                plots.coverage_pair = PairedCampaigns{pl_real.resolve("real"), pl_syn.resolve("synthetic")};
            if (pl_q >= 0.0) plots.pfs_q = pl_q;
            if (pl_d >= 0.0) plots.pfs_d_bar = pl_d;
            report = cli::cmd_report_plots(plots);
            always_write = !report.files.empty();
        }
        if (always_write || !out_dir.empty()) {
            const auto path = cli::write_report(report, out_dir.empty() ? "." : out_dir);
            report.files.push_back(path);
        }
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
        std::cout << report.to_json().dump(2) << '\n';
        return cli::kExitOk;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return cli::exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error (parse): " << e.what() << '\n';
        return cli::kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitConfig;
    }
}
