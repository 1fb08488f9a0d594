#include "scenrel/workflow.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "scenrel/error.hpp"

namespace scenrel {

namespace {

using nlohmann::json;

constexpr double kReplayTolerance = 1e-12;

[[noreturn]] void illegal(Phase phase, EventKind event, const std::string& why = {}) {
    std::string msg = "event '" + std::string(to_string(event)) + "' is not valid in phase '" +
                      std::string(to_string(phase)) + "'";
    if (!why.empty()) msg += ": " + why;
    throw Error(ErrorCode::Transition, msg);
}

const CampaignOutcome& require_campaign(const WorkflowEvent& ev, Phase phase) {
    if (!ev.campaign) illegal(phase, ev.kind, "a campaign payload is required");
    return *ev.campaign;
}

// Relative drop of the synthetic standard-error term when t_s doubles, at
// the current θ̂s. Zero when θ̂s is 0 or 1 (more data cannot shrink it).
double projected_synthetic_reduction(const CampaignOutcome& synthetic) {
    return wald_variance(synthetic) > 0.0 ? 1.0 - 1.0 / std::sqrt(2.0) : 0.0;
}

// Observed relative drop of sigma, normalised to one doubling of t_s.
double observed_reduction_per_doubling(double sigma_before, double sigma_after,
                                       std::uint64_t t_before, std::uint64_t t_after) {
    if (!(sigma_before > 0.0)) return 0.0;
    const double doublings =
        std::log2(static_cast<double>(t_after) / static_cast<double>(t_before));
    return 1.0 - std::pow(sigma_after / sigma_before, 1.0 / doublings);
}

json optional_campaign(const std::optional<CampaignOutcome>& c) {
    if (!c) return nullptr;
    return json{{"t", c->t}, {"k", c->k}};
}

template <class T>
json optional_value(const std::optional<T>& v) {
    if (!v) return nullptr;
    return *v;
}

std::optional<CampaignOutcome> campaign_from(const json& j, const char* t_key, const char* k_key) {
    if (!j.contains(t_key) || j.at(t_key).is_null()) return std::nullopt;
    return CampaignOutcome(j.at(t_key).get<std::uint64_t>(), j.at(k_key).get<std::uint64_t>());
}

bool close(const std::optional<double>& a, const json& b) {
    if (!a) return b.is_null();
    if (b.is_null()) return false;
    return std::abs(*a - b.get<double>()) <= kReplayTolerance;
}

}  // namespace

std::string_view to_string(Phase p) noexcept {
    switch (p) {
        case Phase::CollectReal: return "collect_real";
        case Phase::GenerateSynthetic: return "generate_synthetic";
        case Phase::Certify: return "certify";
        case Phase::IncreaseSynthetic: return "increase_synthetic";
        case Phase::ReconfigureSimulator: return "reconfigure_simulator";
        case Phase::QuantifyFidelityLimit: return "quantify_fidelity_limit";
        case Phase::ScaleUp: return "scale_up";
        case Phase::Monitor: return "monitor";
    }
    return "?";
}

std::string_view to_string(EventKind e) noexcept {
    switch (e) {
        case EventKind::CollectReal: return "collect_real";
        case EventKind::GenerateSynthetic: return "generate_synthetic";
        case EventKind::Certify: return "certify";
        case EventKind::IncreaseSynthetic: return "increase_synthetic";
        case EventKind::Reconfigure: return "reconfigure";
        case EventKind::DeclareExhausted: return "declare_exhausted";
        case EventKind::QuantifyLimit: return "quantify_limit";
        case EventKind::ScaleUp: return "scale_up";
        case EventKind::NewReal: return "new_real";
    }
    return "?";
}

Phase parse_phase(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(Phase::Monitor); ++i)
        if (to_string(static_cast<Phase>(i)) == s) return static_cast<Phase>(i);
    throw Error(ErrorCode::Parse, "unknown workflow phase '" + std::string(s) + "'");
}

EventKind parse_event(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(EventKind::NewReal); ++i)
        if (to_string(static_cast<EventKind>(i)) == s) return static_cast<EventKind>(i);
    throw Error(ErrorCode::Parse, "unknown workflow event '" + std::string(s) + "'");
}

WorkflowState::WorkflowState(WorkflowConfig config) : config_(config) {
    config_.criterion.validate();
    SCENREL_REQUIRE(config_.min_sigma_reduction >= 0.0 && config_.min_sigma_reduction < 1.0,
                    ErrorCode::Domain, "growth threshold must lie in [0,1)");
    SCENREL_REQUIRE(config_.scale_up_confidence > 0.0 && config_.scale_up_confidence < 1.0,
                    ErrorCode::Domain, "scale-up confidence must lie in (0,1)");
}

bool WorkflowState::visited(Phase p) const noexcept {
    for (const auto& e : history_)
        if (e.phase == p || e.from == p) return true;
    return phase_ == p;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

WorkflowState workflow_step(const WorkflowState& state, const WorkflowEvent& ev,
                            std::string timestamp) {
    WorkflowState next = state;
    HistoryEntry entry;
    entry.from = state.phase_;
    entry.event = ev.kind;
    entry.campaign = ev.campaign;
    entry.timestamp = std::move(timestamp);

    const auto& cfg = state.config_;
    auto assess = [&] {
        next.assessment_ = certify_ref({*next.real_, *next.synthetic_}, cfg.criterion);
        entry.coverage = next.assessment_->coverage;
        entry.certified = next.assessment_->certified;
        return *next.assessment_;
    };

    switch (ev.kind) {
        case EventKind::CollectReal:
            if (state.phase_ != Phase::CollectReal) illegal(state.phase_, ev.kind);
            {
                const auto& c = require_campaign(ev, state.phase_);
                if (c.t == 0) illegal(state.phase_, ev.kind, "real campaign is empty");
                next.real_ = c;
            }
            next.phase_ = Phase::GenerateSynthetic;
            break;

        case EventKind::GenerateSynthetic:
            if (state.phase_ != Phase::GenerateSynthetic) illegal(state.phase_, ev.kind);
            {
                const auto& c = require_campaign(ev, state.phase_);
                if (c.t == 0) illegal(state.phase_, ev.kind, "synthetic campaign is empty");
                next.synthetic_ = c;
            }
            next.phase_ = Phase::Certify;
            break;

        case EventKind::Certify: {
            if (state.phase_ != Phase::Certify) illegal(state.phase_, ev.kind);
            const auto a = assess();
            if (a.certified)
                next.phase_ = Phase::ScaleUp;
            else if (projected_synthetic_reduction(*next.synthetic_) >= cfg.min_sigma_reduction)
                next.phase_ = Phase::IncreaseSynthetic;
            else
                next.phase_ = Phase::ReconfigureSimulator;
            break;
        }

        case EventKind::IncreaseSynthetic: {
            if (state.phase_ != Phase::IncreaseSynthetic) illegal(state.phase_, ev.kind);
            const auto& c = require_campaign(ev, state.phase_);
            if (c.t <= state.synthetic_->t)
                illegal(state.phase_, ev.kind, "the synthetic campaign must grow");
            const double sigma_before = state.assessment_->delta.sigma;
            next.synthetic_ = c;
            const auto a = assess();
            if (a.certified) {
                next.phase_ = Phase::ScaleUp;
            } else {
                const double gain = observed_reduction_per_doubling(sigma_before, a.delta.sigma,
                                                                    state.synthetic_->t, c.t);
                next.phase_ = gain >= cfg.min_sigma_reduction ? Phase::IncreaseSynthetic
                                                              : Phase::ReconfigureSimulator;
            }
            break;
        }

        case EventKind::Reconfigure:
            if (state.phase_ != Phase::ReconfigureSimulator) illegal(state.phase_, ev.kind);
            if (ev.campaign) {
                if (ev.campaign->t == 0) illegal(state.phase_, ev.kind, "synthetic campaign is empty");
                next.synthetic_ = *ev.campaign;
                next.phase_ = Phase::Certify;
            } else {
                next.phase_ = Phase::GenerateSynthetic;
            }
            break;

        case EventKind::DeclareExhausted:
            if (state.phase_ != Phase::Certify && state.phase_ != Phase::ReconfigureSimulator)
                illegal(state.phase_, ev.kind);
            next.phase_ = Phase::QuantifyFidelityLimit;
            break;

        case EventKind::QuantifyLimit:
            if (state.phase_ != Phase::QuantifyFidelityLimit) illegal(state.phase_, ev.kind);
            {
                const double eps = smallest_certifiable_epsilon(
                    PairedCampaigns{*next.real_, *next.synthetic_}, cfg.criterion.alpha);
                entry.epsilon_star = eps;
                auto a = assess();
                a.epsilon_star = eps;
                next.assessment_ = a;
            }
            next.phase_ = Phase::ScaleUp;
            break;

        case EventKind::ScaleUp:
            if (state.phase_ != Phase::ScaleUp) illegal(state.phase_, ev.kind);
            if (ev.campaign) {
                if (ev.campaign->t == 0) illegal(state.phase_, ev.kind, "scale-up campaign is empty");
                const auto ci = scale_up_interval(*ev.campaign, cfg.scale_up_confidence);
                entry.ci_lo = ci.lo;
                entry.ci_hi = ci.hi;
            }
            next.phase_ = Phase::Monitor;
            break;

        case EventKind::NewReal: {
            if (state.phase_ != Phase::Monitor) illegal(state.phase_, ev.kind);
            const auto& c = require_campaign(ev, state.phase_);
            if (c.t == 0) illegal(state.phase_, ev.kind, "real campaign is empty");
            next.real_ = c;
            next.phase_ = assess().certified ? Phase::Monitor : Phase::Certify;
            break;
        }
    }

    entry.phase = next.phase_;
    entry.real = next.real_;
    entry.synthetic = next.synthetic_;
    next.history_.push_back(std::move(entry));
    return next;
}

std::string serialize_entry(const HistoryEntry& e, const WorkflowConfig& config) {
    json j;
    j["from"] = to_string(e.from);
    j["phase"] = to_string(e.phase);
    j["event"] = to_string(e.event);
    j["campaign"] = optional_campaign(e.campaign);
    j["t_r"] = e.real ? json(e.real->t) : json(nullptr);
    j["k_r"] = e.real ? json(e.real->k) : json(nullptr);
    j["t_s"] = e.synthetic ? json(e.synthetic->t) : json(nullptr);
    j["k_s"] = e.synthetic ? json(e.synthetic->k) : json(nullptr);
    j["coverage"] = optional_value(e.coverage);
    j["certified"] = optional_value(e.certified);
    j["epsilon_star"] = optional_value(e.epsilon_star);
    j["ci_lo"] = optional_value(e.ci_lo);
    j["ci_hi"] = optional_value(e.ci_hi);
    j["epsilon"] = config.criterion.epsilon;
    j["alpha"] = config.criterion.alpha;
    j["tolerance_mode"] =
        config.criterion.mode == ToleranceMode::Relative ? "relative" : "absolute";
    j["growth_threshold"] = config.min_sigma_reduction;
    j["scale_up_confidence"] = config.scale_up_confidence;
    j["timestamp"] = e.timestamp;
    return j.dump();
}

void write_history(std::ostream& out, const WorkflowState& state) {
    for (const auto& e : state.history()) out << serialize_entry(e, state.config()) << '\n';
}

WorkflowState replay_history(std::istream& in) {
    std::optional<WorkflowState> state;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "workflow log line " + std::to_string(line_no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            throw Error(ErrorCode::Parse, where + ex.what());
        }
        try {
            WorkflowConfig cfg;
            cfg.criterion.epsilon = j.at("epsilon").get<double>();
            cfg.criterion.alpha = j.at("alpha").get<double>();
            cfg.criterion.mode = j.value("tolerance_mode", std::string("absolute")) == "relative"
                                     ? ToleranceMode::Relative
                                     : ToleranceMode::Absolute;
            cfg.min_sigma_reduction = j.value("growth_threshold", 0.05);
            cfg.scale_up_confidence = j.value("scale_up_confidence", 0.95);
            if (!state) {
                state.emplace(cfg);
            } else {
                const auto& cur = state->config();
                if (cur.criterion.epsilon != cfg.criterion.epsilon ||
                    cur.criterion.alpha != cfg.criterion.alpha ||
                    cur.criterion.mode != cfg.criterion.mode ||
                    cur.min_sigma_reduction != cfg.min_sigma_reduction ||
                    cur.scale_up_confidence != cfg.scale_up_confidence)
                    throw Error(ErrorCode::Parse, "criterion changes mid-log");
            }

            WorkflowEvent ev{parse_event(j.at("event").get<std::string>()), std::nullopt};
            if (j.contains("campaign") && !j.at("campaign").is_null())
                ev.campaign = campaign_from(j.at("campaign"), "t", "k");

            if (parse_phase(j.at("from").get<std::string>()) != state->phase())
                throw Error(ErrorCode::Transition, "logged source phase does not match replay");
            *state = workflow_step(*state, ev, j.at("timestamp").get<std::string>());

            const auto& got = state->history().back();
            if (to_string(got.phase) != j.at("phase").get<std::string>())
                throw Error(ErrorCode::Transition,
                            "logged phase '" + j.at("phase").get<std::string>() +
                                "' but replay reaches '" + std::string(to_string(got.phase)) + "'");
            if (!close(got.coverage, j.value("coverage", json(nullptr))) ||
                !close(got.epsilon_star, j.value("epsilon_star", json(nullptr))))
                throw Error(ErrorCode::Transition, "logged assessment does not replay");
            if (got.real != campaign_from(j, "t_r", "k_r") ||
                got.synthetic != campaign_from(j, "t_s", "k_s"))
                throw Error(ErrorCode::Transition, "logged campaigns do not replay");
        } catch (const Error& ex) {
            throw Error(ex.code(), where + ex.what());
        } catch (const json::exception& ex) {
            throw Error(ErrorCode::Parse, where + ex.what());
        }
    }
    SCENREL_REQUIRE(state.has_value(), ErrorCode::Parse, "workflow log is empty");
    return *state;
}

}  // namespace scenrel
