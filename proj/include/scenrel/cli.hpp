#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scenrel/error.hpp"
#include "scenrel/estimators.hpp"
#include "scenrel/ref_cert.hpp"

namespace scenrel::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 1;

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitParse = 2,
    kExitDomain = 3,
    kExitInsufficientData = 4,
    kExitTransition = 5,
    kExitConfig = 6,
    kExitNumerical = 7,
};

int exit_code_for(ErrorCode code) noexcept;

struct Report {
    std::string subcommand;
    nlohmann::json inputs = nlohmann::json::object();
    nlohmann::json results = nlohmann::json::object();
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> files;
    std::optional<std::uint64_t> seed;

    nlohmann::json to_json() const;
};

/// Six significant digits, as used in CSV and text output.
std::string format_probability(double p);

/// Writes the report as `<out_dir>/<subcommand>_report.json` and returns the path.
std::filesystem::path write_report(const Report& report, const std::filesystem::path& out_dir);

struct EstimateConfig {
    std::filesystem::path campaign;
    std::optional<std::filesystem::path> prior;
    std::optional<std::filesystem::path> space;
    double confidence = 0.95;
};

Report cmd_estimate(const EstimateConfig& config);

struct CompareConfig {
    std::filesystem::path sweep;
    std::filesystem::path out_dir = ".";
    bool monte_carlo = false;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = 0;
};

inline constexpr std::string_view kCompareHeader =
    "config_id,e_pfs_mile,e_pfs_scenario,verdict,mc_mean,mc_se,mc_mean_mile,mc_se_mile";

/// Writes `<out_dir>/compare.csv`.
Report cmd_compare(const CompareConfig& config);

struct CertifyConfig {
    PairedCampaigns pair;
    RefCriterion criterion;
};
Report cmd_ref_certify(const CertifyConfig& config);

struct EpsilonStarConfig {
    PairedCampaigns pair;
    double alpha = 0.05;
};
Report cmd_ref_epsilon_star(const EpsilonStarConfig& config);

struct WorkflowCliConfig {
    std::filesystem::path log;
    std::optional<std::string> event;
    std::optional<CampaignOutcome> campaign;
    RefCriterion criterion;
    double growth_threshold = 0.05;
    std::optional<std::string> timestamp;
};
/// Replays the log (if any), applies the event (if any) and appends it.
Report cmd_ref_workflow(const WorkflowCliConfig& config);

struct OcConfig {
    double theta_r = 0.0;
    double theta_s = 0.0;
    std::uint64_t t_r = 0;
    std::uint64_t t_s = 0;
    RefCriterion criterion;
    std::size_t replicates = 10000;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = 0;
};
Report cmd_ref_oc(const OcConfig& config);

struct PlotsConfig {
    std::filesystem::path out_dir = ".";
    std::optional<PairedCampaigns> coverage_pair;
    double alpha = 0.05;
    double epsilon_max = 0.05;
    std::size_t points = 201;
    std::optional<double> pfs_q;
    std::optional<double> pfs_d_bar;
    std::uint64_t t_max = 100;
};

/// coverage_vs_epsilon.csv and/or pfs_vs_t.csv; nothing when nothing is requested.
Report cmd_report_plots(const PlotsConfig& config);

/// "T:K" -> CampaignOutcome.
CampaignOutcome parse_counts(std::string_view text);

}  // namespace scenrel::cli
