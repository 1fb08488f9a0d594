#include "scenrel/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "scenrel/error.hpp"

namespace scenrel {

namespace {

using nlohmann::json;

std::string escape_pointer_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

std::size_t line_of_byte(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

class Diagnostics {
public:
    Diagnostics(std::string source, std::map<std::string, std::size_t> lines)
        : source_(std::move(source)), lines_(std::move(lines)) {}

    std::size_t line(const std::string& pointer) const {
        std::string p = pointer;
        while (true) {
            if (auto it = lines_.find(p); it != lines_.end()) return it->second;
            if (p.empty()) return 1;
            p.erase(p.rfind('/'));
        }
    }

    void add(const std::string& pointer, const std::string& msg) {
        messages_.push_back(source_ + ":" + std::to_string(line(pointer)) + ": " + msg);
    }

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) {
        add(pointer, msg);
        raise();
    }

    void raise_if_any() const {
        if (!messages_.empty()) raise();
    }

private:
    [[noreturn]] void raise() const {
        std::string all;
        for (const auto& m : messages_) {
            if (!all.empty()) all += '\n';
            all += m;
        }
        throw Error(ErrorCode::Parse, all);
    }

    std::string source_;
    std::map<std::string, std::size_t> lines_;
    std::vector<std::string> messages_;
};

template <class T>
T field(const json& obj, const char* key, const std::string& pointer, Diagnostics& diag) {
    if (!obj.is_object() || !obj.contains(key)) diag.fail(pointer, std::string("missing field '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        diag.fail(pointer + "/" + key, std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

std::map<std::string, std::size_t> json_value_lines(std::string_view s) {
    struct Frame {
        explicit Frame(bool is_array) : array(is_array) {}
        bool array;
        std::size_t index = 0;
        std::string key;
        bool want_key = true;
    };
    std::vector<Frame> stack;
    std::map<std::string, std::size_t> out;
    std::size_t line = 1;

    auto path = [&] {
        std::string p;
        for (const auto& f : stack)
            p += "/" + (f.array ? std::to_string(f.index) : escape_pointer_token(f.key));
        return p;
    };
    auto read_string = [&](std::size_t& i) {
        std::string value;
        ++i;  // opening quote
        while (i < s.size() && s[i] != '"') {
            if (s[i] == '\\' && i + 1 < s.size()) {
                ++i;
                value += s[i] == 'n' ? '\n' : s[i];
            } else {
                value += s[i];
            }
            ++i;
        }
        ++i;  // closing quote
        return value;
    };

    for (std::size_t i = 0; i < s.size();) {
        const char c = s[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ':') {
            ++i;
        } else if (c == ',') {
            if (!stack.empty()) {
                if (stack.back().array)
                    ++stack.back().index;
                else
                    stack.back().want_key = true;
            }
            ++i;
        } else if (c == '}' || c == ']') {
            if (!stack.empty()) stack.pop_back();
            ++i;
        } else if (c == '"' && !stack.empty() && !stack.back().array && stack.back().want_key) {
            stack.back().key = read_string(i);
            stack.back().want_key = false;
        } else {
            out[path()] = line;
            if (c == '{') {
                stack.emplace_back(false);
                ++i;
            } else if (c == '[') {
                stack.emplace_back(true);
                ++i;
            } else if (c == '"') {
                read_string(i);
            } else {
                while (i < s.size() && std::strchr(",}] \t\r\n", s[i]) == nullptr) ++i;
            }
        }
    }
    return out;
}

ScenarioDocument parse_scenario_document(std::string_view text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw Error(ErrorCode::Parse,
                    source + ":" + std::to_string(line_of_byte(text, ex.byte)) + ": " + ex.what());
    }
    Diagnostics diag(source, json_value_lines(text));
    if (!doc.is_object()) diag.fail("", "top level must be an object");

    ScenarioSpace space;
    OperationalProfile op;
    space.n_subdomains = field<std::size_t>(doc, "n_subdomains", "", diag);
    if (!doc.contains("scenarios") || !doc.at("scenarios").is_array())
        diag.fail("", "missing array 'scenarios'");

    std::map<std::string, std::string> pointer_of;  // scenario id -> JSON pointer
    const auto& scenarios = doc.at("scenarios");
    for (std::size_t j = 0; j < scenarios.size(); ++j) {
        const std::string ptr = "/scenarios/" + std::to_string(j);
        const auto& s = scenarios[j];
        const auto id = field<std::string>(s, "id", ptr, diag);
        const auto sub = field<std::int64_t>(s, "subdomain", ptr, diag);
        const auto mass = field<double>(s, "op_mass", ptr, diag);
        if (sub < 1) diag.add(ptr + "/subdomain", "subdomain index must be >= 1");
        space.scenarios.push_back(id);
        if (!pointer_of.contains(id)) {
            pointer_of[id] = ptr;
            space.partition[id] = static_cast<std::size_t>(std::max<std::int64_t>(sub, 0));
            op.mass[id] = mass;
        } else {
            pointer_of[id + "#dup"] = ptr;
        }
    }
    diag.raise_if_any();

    for (const auto& v : validate_space(space, op)) {
        std::string ptr = "/n_subdomains";
        if (!v.scenario.empty()) {
            const auto dup = pointer_of.find(v.scenario + "#dup");
            if (v.kind == ViolationKind::DuplicateScenario && dup != pointer_of.end())
                ptr = dup->second;
            else if (auto it = pointer_of.find(v.scenario); it != pointer_of.end())
                ptr = it->second;
        } else if (v.kind == ViolationKind::MassSum) {
            ptr = "/scenarios";
        }
        diag.add(ptr, v.message);
    }
    diag.raise_if_any();

    ScenarioDocument out{ScenarioModel(std::move(space), std::move(op)), std::nullopt, {}};

    if (doc.contains("failure_region")) {
        const auto& fr = doc.at("failure_region");
        if (!fr.is_array()) diag.fail("/failure_region", "'failure_region' must be an array of ids");
        FailureRegion region;
        for (std::size_t j = 0; j < fr.size(); ++j) {
            const std::string ptr = "/failure_region/" + std::to_string(j);
            if (!fr[j].is_string()) {
                diag.add(ptr, "failure region entries must be scenario ids");
                continue;
            }
            const auto id = fr[j].get<std::string>();
            if (!out.model.contains(id))
                diag.add(ptr, "failure region names unknown scenario '" + id + "'");
            region.members.insert(id);
        }
        diag.raise_if_any();
        out.failure_region = std::move(region);
    }

    if (doc.contains("proposals")) {
        const auto& props = doc.at("proposals");
        if (!props.is_array()) diag.fail("/proposals", "'proposals' must be an array");
        for (std::size_t j = 0; j < props.size(); ++j) {
            const std::string ptr = "/proposals/" + std::to_string(j);
            ProposalDistribution p;
            const auto sub = field<std::int64_t>(props[j], "subdomain", ptr, diag);
            p.subdomain = {static_cast<std::size_t>(std::max<std::int64_t>(sub, 0))};
            p.mass = field<std::map<std::string, double>>(props[j], "mass", ptr, diag);
            for (const auto& v : validate_proposal(out.model, p)) diag.add(ptr, v.message);
            out.proposals.push_back(std::move(p));
        }
        diag.raise_if_any();
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    SCENREL_REQUIRE(in.good(), ErrorCode::Config, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioDocument load_scenario_document(const std::filesystem::path& path) {
    return parse_scenario_document(read_text_file(path), path.string());
}

CampaignOutcome CampaignLog::overall() const {
    const auto fails = static_cast<std::uint64_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return r.failed; }));
    return CampaignOutcome(records.size(), fails);
}

std::map<std::size_t, CampaignOutcome> CampaignLog::per_subdomain() const {
    std::map<std::size_t, std::pair<std::uint64_t, std::uint64_t>> acc;
    for (const auto& r : records) {
        auto& [t, k] = acc[r.subdomain];
        ++t;
        if (r.failed) ++k;
    }
    std::map<std::size_t, CampaignOutcome> out;
    for (const auto& [sub, tk] : acc) out.emplace(sub, CampaignOutcome(tk.first, tk.second));
    return out;
}

CampaignLog parse_campaign_log(std::istream& in, const std::string& source) {
    CampaignLog log;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::Parse, source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (!line.empty() && line.back() == ',') cells.emplace_back();

        if (!header_seen) {
            if (cells != std::vector<std::string>{"scenario_id", "subdomain", "outcome"})
                fail("expected header 'scenario_id,subdomain,outcome'");
            header_seen = true;
            continue;
        }
        if (cells.size() != 3) fail("expected 3 fields, got " + std::to_string(cells.size()));
        CampaignRecord rec;
        rec.line = line_no;
        rec.scenario_id = cells[0];
        if (rec.scenario_id.empty()) fail("empty scenario_id");
        try {
            std::size_t used = 0;
            const long long sub = std::stoll(cells[1], &used);
            if (used != cells[1].size() || sub < 1) throw std::invalid_argument("range");
            rec.subdomain = static_cast<std::size_t>(sub);
        } catch (const std::exception&) {
            fail("subdomain must be a positive integer, got '" + cells[1] + "'");
        }
        if (cells[2] == "fail")
            rec.failed = true;
        else if (cells[2] != "pass")
            fail("outcome must be 'pass' or 'fail', got '" + cells[2] + "'");
        log.records.push_back(std::move(rec));
    }
    return log;
}

CampaignLog load_campaign_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    SCENREL_REQUIRE(in.good(), ErrorCode::Config, "cannot open '" + path.string() + "'");
    return parse_campaign_log(in, path.string());
}

PriorSpec parse_prior(std::string_view text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw Error(ErrorCode::Parse,
                    source + ":" + std::to_string(line_of_byte(text, ex.byte)) + ": " + ex.what());
    }
    Diagnostics diag(source, json_value_lines(text));
    const auto kind = field<std::string>(doc, "kind", "", diag);
    try {
        if (kind == "beta")
            return PriorSpec::beta(field<double>(doc, "a", "", diag), field<double>(doc, "b", "", diag));
        if (kind == "grid")
            return PriorSpec::grid(field<std::vector<double>>(doc, "values", "", diag));
    } catch (const Error& ex) {
        if (ex.code() == ErrorCode::Parse) throw;
        diag.fail("", ex.what());
    }
    diag.fail("/kind", "prior kind must be 'beta' or 'grid', got '" + kind + "'");
}

PriorSpec load_prior(const std::filesystem::path& path) {
    return parse_prior(read_text_file(path), path.string());
}

}  // namespace scenrel
