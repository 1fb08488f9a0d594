#pragma once

// Certification workflow as an append-only state machine.
//
//   collect_real         CollectReal          -> GenerateSynthetic
//   generate_synthetic   GenerateSynthetic    -> Certify
//   certify              Certify              -> ScaleUp | IncreaseSynthetic | ReconfigureSimulator
//   increase_synthetic   IncreaseSynthetic    -> (Certify) -> ScaleUp | IncreaseSynthetic | ReconfigureSimulator
//   reconfigure          ReconfigureSimulator -> GenerateSynthetic, or -> Certify when it carries
//                                                the regenerated synthetic campaign
//   declare_exhausted    Certify | ReconfigureSimulator -> QuantifyFidelityLimit
//   quantify_limit       QuantifyFidelityLimit -> ScaleUp        (records epsilon_star)
//   scale_up             ScaleUp              -> Monitor         (optional scale-up campaign)
//   new_real             Monitor              -> Certify if the criterion is violated, else Monitor
//
// A failed certification keeps growing the synthetic campaign while growth
// still pays: before any growth, the projected drop of the synthetic
// standard-error term per doubling of t_s; after a growth step, the observed
// drop of sigma per doubling. Below `min_sigma_reduction` the loop stalls and
// the simulator must be reconfigured.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenrel/estimators.hpp"
#include "scenrel/ref_cert.hpp"

namespace scenrel {

enum class Phase {
    CollectReal,
    GenerateSynthetic,
    Certify,
    IncreaseSynthetic,
    ReconfigureSimulator,
    QuantifyFidelityLimit,
    ScaleUp,
    Monitor,
};

enum class EventKind {
    CollectReal,
    GenerateSynthetic,
    Certify,
    IncreaseSynthetic,
    Reconfigure,
    DeclareExhausted,
    QuantifyLimit,
    ScaleUp,
    NewReal,
};

std::string_view to_string(Phase p) noexcept;
std::string_view to_string(EventKind e) noexcept;
Phase parse_phase(std::string_view s);
EventKind parse_event(std::string_view s);

struct WorkflowEvent {
    EventKind kind;
    std::optional<CampaignOutcome> campaign;
};

struct WorkflowConfig {
    RefCriterion criterion;
    double min_sigma_reduction = 0.05;
    double scale_up_confidence = 0.95;
};

struct HistoryEntry {
    Phase from = Phase::CollectReal;
    Phase phase = Phase::CollectReal;
    EventKind event = EventKind::CollectReal;
    std::optional<CampaignOutcome> campaign;  // event payload
    std::optional<CampaignOutcome> real;      // state after the event
    std::optional<CampaignOutcome> synthetic;
    std::optional<double> coverage;
    std::optional<bool> certified;
    std::optional<double> epsilon_star;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
    std::string timestamp;
};

class WorkflowState {
public:
    explicit WorkflowState(WorkflowConfig config);

    Phase phase() const noexcept { return phase_; }
    const WorkflowConfig& config() const noexcept { return config_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }
    const std::optional<CampaignOutcome>& real() const noexcept { return real_; }
    const std::optional<CampaignOutcome>& synthetic() const noexcept { return synthetic_; }
    const std::optional<RefAssessment>& last_assessment() const noexcept { return assessment_; }
    /// Whether any transition ever entered the given phase.
    bool visited(Phase p) const noexcept;

    friend WorkflowState workflow_step(const WorkflowState& state, const WorkflowEvent& event,
                                       std::string timestamp);

private:
    WorkflowConfig config_;
    Phase phase_ = Phase::CollectReal;
    std::optional<CampaignOutcome> real_;
    std::optional<CampaignOutcome> synthetic_;
    std::optional<RefAssessment> assessment_;
    std::vector<HistoryEntry> history_;
};

/// ISO-8601 UTC timestamp of the current time.
std::string utc_timestamp();

/// Applies one event and returns the new state; throws Error(Transition) for
/// an event that is not legal in the current phase (the input is untouched).
WorkflowState workflow_step(const WorkflowState& state, const WorkflowEvent& event,
                            std::string timestamp = utc_timestamp());

/// One JSON object per line.
std::string serialize_entry(const HistoryEntry& entry, const WorkflowConfig& config);
void write_history(std::ostream& out, const WorkflowState& state);

/// Replays a JSON-lines log from a fresh state, checking that every logged
/// entry matches the recomputed one. The criterion is taken from the log.
WorkflowState replay_history(std::istream& in);

}  // namespace scenrel
