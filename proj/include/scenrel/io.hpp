#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenrel/estimators.hpp"
#include "scenrel/scenario_space.hpp"

namespace scenrel {

/// Parsed scenario-space document:
///   { "n_subdomains": n,
///     "scenarios": [ {"id": "...", "subdomain": i, "op_mass": p}, ... ],
///     "failure_region": ["id", ...],                          (optional)
///     "proposals": [ {"subdomain": i, "mass": {"id": p}} ] }  (optional)
struct ScenarioDocument {
    ScenarioModel model;
    std::optional<FailureRegion> failure_region;
    std::vector<ProposalDistribution> proposals;
};

/// Throws Error(Parse) with "source:line: message" diagnostics, one per
/// violated invariant.
ScenarioDocument parse_scenario_document(std::string_view text,
                                         const std::string& source = "<input>");
ScenarioDocument load_scenario_document(const std::filesystem::path& path);

/// Line (1-based) of every value in a JSON text, keyed by JSON pointer.
/// The text must already be valid JSON.
std::map<std::string, std::size_t> json_value_lines(std::string_view text);

struct CampaignRecord {
    std::size_t line = 0;
    std::string scenario_id;
    std::size_t subdomain = 0;
    bool failed = false;
};

/// CSV campaign log with header `scenario_id,subdomain,outcome`,
/// outcome in {pass, fail}.
struct CampaignLog {
    std::vector<CampaignRecord> records;

    CampaignOutcome overall() const;
    std::map<std::size_t, CampaignOutcome> per_subdomain() const;
};

CampaignLog parse_campaign_log(std::istream& in, const std::string& source = "<input>");
CampaignLog load_campaign_log(const std::filesystem::path& path);

/// {"kind":"beta","a":..,"b":..} or {"kind":"grid","values":[...]}.
PriorSpec parse_prior(std::string_view text, const std::string& source = "<input>");
PriorSpec load_prior(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace scenrel
