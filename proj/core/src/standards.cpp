#include "hydro/standards.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "hydro/codec.hpp"
#include "hydro/error.hpp"

namespace hydro {

using nlohmann::json;

namespace {

std::string describe(const std::optional<double>& lo, const std::optional<double>& hi) {
    std::ostringstream os;
    os << '[' << (lo ? std::to_string(*lo) : "-inf") << ", " << (hi ? std::to_string(*hi) : "inf") << ']';
    return os.str();
}

void check_spec(const RangeSpec& s) {
    if (!s.min && !s.max)
        throw Error("INVALID_RANGE", s.authority + " range for " + s.parameter + "/" + s.purpose + " has no bound");
    if ((s.min && !std::isfinite(*s.min)) || (s.max && !std::isfinite(*s.max)))
        throw Error("INVALID_RANGE", s.authority + " range for " + s.parameter + "/" + s.purpose + " is not finite");
    if (s.min && s.max && *s.min > *s.max)
        throw Error("INVALID_RANGE", s.authority + " range for " + s.parameter + "/" + s.purpose + " has min > max");
}

std::optional<double> opt_number(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw Error("PARSE_ERROR", std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::string req_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw Error("PARSE_ERROR", where + ": field '" + key + "' must be a string");
    return it->get<std::string>();
}

const json& req_array(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) throw Error("PARSE_ERROR", where + ": field '" + key + "' must be an array");
    return *it;
}

std::string config_checksum(std::string_view document) {
    const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(document.data()), static_cast<uInt>(document.size()));
    std::ostringstream os;
    os << "crc32:" << std::hex << crc;
    return os.str();
}

}  // namespace

bool PurposeProfile::is_relevant(std::string_view code) const {
    return std::find(relevant_parameters.begin(), relevant_parameters.end(), code) != relevant_parameters.end();
}

const ReconciledRange* PurposeProfile::range_for(std::string_view code) const {
    auto it = ranges.find(std::string(code));
    return it == ranges.end() ? nullptr : &it->second;
}

std::string_view to_string(SafetyStatus s) {
    switch (s) {
        case SafetyStatus::Safe: return "SAFE";
        case SafetyStatus::UnsafeLow: return "UNSAFE_LOW";
        case SafetyStatus::UnsafeHigh: return "UNSAFE_HIGH";
        case SafetyStatus::NoData: return "NO_DATA";
        case SafetyStatus::NotApplicable: return "NOT_APPLICABLE";
    }
    return "NOT_APPLICABLE";
}

ReconciledRange reconcile(std::span<const RangeSpec> specs) {
    if (specs.empty()) throw Error("INVALID_RANGE", "reconcile needs at least one range spec");

    ReconciledRange out;
    out.parameter = specs.front().parameter;
    out.purpose = specs.front().purpose;
    std::set<std::string> authorities;
    for (const auto& s : specs) {
        if (s.parameter != out.parameter || s.purpose != out.purpose)
            throw Error("INVALID_RANGE", "range specs mix parameters or purposes");
        check_spec(s);
        if (s.min) out.min = out.min ? std::max(*out.min, *s.min) : *s.min;
        if (s.max) out.max = out.max ? std::min(*out.max, *s.max) : *s.max;
        authorities.insert(s.authority);
    }
    out.contributing_authorities.assign(authorities.begin(), authorities.end());

    if (out.min && out.max && *out.min > *out.max) {
        std::string names;
        for (const auto& s : specs) {
            if (!names.empty()) names += ", ";
            names += s.authority + " " + describe(s.min, s.max);
        }
        throw Error("CONFLICT", "conflicting ranges for parameter " + out.parameter + " purpose " + out.purpose +
                                    ": " + names);
    }
    return out;
}

SafetyStatus evaluate(double value, const ReconciledRange& range) {
    if (range.min && value < *range.min) return SafetyStatus::UnsafeLow;
    if (range.max && value > *range.max) return SafetyStatus::UnsafeHigh;
    return SafetyStatus::Safe;
}

Assessment assess(std::string location_id, const LatestMap& latest, const PurposeProfile& purpose,
                  const ParameterRegistry& registry, Instant as_of) {
    Assessment out{std::move(location_id), purpose.id, as_of, {}};
    out.entries.reserve(registry.size());

    auto make_entry = [&](const std::string& code, bool relevant) {
        AssessmentEntry e;
        e.parameter = code;
        e.relevant = relevant;
        if (auto it = latest.find(code); it != latest.end()) {
            e.latest_value = it->second.value;
            e.reading_timestamp = it->second.timestamp;
            e.source = it->second.source;
        }
        if (const auto* r = purpose.range_for(code)) {
            e.range = *r;
            e.status = e.latest_value ? evaluate(*e.latest_value, *r) : SafetyStatus::NoData;
        } else {
            e.status = SafetyStatus::NotApplicable;
        }
        out.entries.push_back(std::move(e));
    };

    for (const auto& code : purpose.relevant_parameters) {
        if (registry.find(code)) make_entry(code, true);
    }
    for (const auto& [code, param] : registry.parameters()) {
        if (!purpose.is_relevant(code)) make_entry(code, false);
    }
    return out;
}

const PurposeProfile* Standards::find_purpose(std::string_view id) const {
    for (const auto& p : purposes) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

const PurposeProfile& Standards::purpose(std::string_view id) const {
    if (const auto* p = find_purpose(id)) return *p;
    std::string known;
    for (const auto& p : purposes) known += (known.empty() ? "" : ", ") + p.id;
    throw Error("UNKNOWN_PURPOSE", "unknown purpose '" + std::string(id) + "' (configured: " + known + ")");
}

const PurposeProfile* Standards::default_purpose() const { return purposes.empty() ? nullptr : &purposes.front(); }

std::size_t Standards::ranged_parameter_count() const {
    std::set<std::string> codes;
    for (const auto& p : purposes) {
        for (const auto& [code, r] : p.ranges) codes.insert(code);
    }
    return codes.size();
}

Standards load_standards(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw Error("PARSE_ERROR", std::string("standards config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error("PARSE_ERROR", "standards config must be a JSON object");

    Standards out;
    out.version = doc.contains("version") && doc["version"].is_string() ? doc["version"].get<std::string>()
                                                                         : config_checksum(document);

    for (const auto& p : req_array(doc, "parameters", "standards")) {
        if (!p.is_object()) throw Error("PARSE_ERROR", "parameters: entries must be objects");
        Parameter param;
        param.code = req_string(p, "code", "parameter");
        param.display_name = p.value("name", param.code);
        param.canonical_unit = req_string(p, "unit", "parameter " + param.code);
        param.plausible_min = opt_number(p, "plausible_min");
        param.plausible_max = opt_number(p, "plausible_max");
        param.description = p.value("description", std::string());
        out.registry.add(std::move(param));
    }

    if (doc.contains("unit_rules")) {
        for (const auto& r : req_array(doc, "unit_rules", "standards")) {
            if (!r.is_object() || !r.contains("scale") || !r["scale"].is_number())
                throw Error("PARSE_ERROR", "unit_rules: entries need from, to and a numeric scale");
            out.registry.add_rule(UnitRule{req_string(r, "from", "unit rule"), req_string(r, "to", "unit rule"),
                                           r["scale"].get<double>()});
        }
    }

    const json empty = json::array();
    const json& purposes = doc.contains("purposes") ? req_array(doc, "purposes", "standards") : empty;
    if (purposes.empty()) out.warnings.push_back("no purposes configured");

    std::set<std::string> seen;
    for (const auto& p : purposes) {
        if (!p.is_object()) throw Error("PARSE_ERROR", "purposes: entries must be objects");
        PurposeProfile profile;
        profile.id = req_string(p, "id", "purpose");
        if (profile.id.empty()) throw Error("INVALID_CONFIG", "purpose id must be non-empty");
        if (!seen.insert(profile.id).second) throw Error("DUPLICATE_PURPOSE", "purpose " + profile.id + " declared twice");
        profile.display_name = p.value("name", profile.id);
        const std::string where = "purpose " + profile.id;

        for (const auto& code : req_array(p, "relevant_parameters", where)) {
            if (!code.is_string()) throw Error("PARSE_ERROR", where + ": relevant_parameters must be strings");
            const auto c = code.get<std::string>();
            if (!out.registry.find(c))
                throw Error("UNKNOWN_PARAMETER_IN_RANGE", where + " lists unknown parameter " + c);
            if (profile.is_relevant(c)) throw Error("INVALID_CONFIG", where + " lists " + c + " twice");
            profile.relevant_parameters.push_back(c);
        }
        if (profile.relevant_parameters.empty())
            throw Error("INVALID_CONFIG", where + " must have at least one relevant parameter");

        std::map<std::string, std::vector<RangeSpec>> by_parameter;
        if (p.contains("ranges")) {
            for (const auto& r : req_array(p, "ranges", where)) {
                if (!r.is_object()) throw Error("PARSE_ERROR", where + ": ranges entries must be objects");
                RangeSpec spec{req_string(r, "parameter", where), profile.id, req_string(r, "authority", where),
                               opt_number(r, "min"), opt_number(r, "max")};
                if (!out.registry.find(spec.parameter))
                    throw Error("UNKNOWN_PARAMETER_IN_RANGE",
                                where + ": range by " + spec.authority + " names unknown parameter " + spec.parameter);
                if (!profile.is_relevant(spec.parameter))
                    throw Error("INVALID_CONFIG",
                                where + ": range for " + spec.parameter + " but it is not a relevant parameter");
                try {
                    check_spec(spec);
                } catch (const Error& e) {
                    throw Error("INVALID_CONFIG", e.what());
                }
                by_parameter[spec.parameter].push_back(std::move(spec));
            }
        }
        for (auto& [code, specs] : by_parameter) profile.ranges.emplace(code, reconcile(specs));
        for (const auto& code : profile.relevant_parameters) {
            if (!profile.ranges.contains(code)) out.warnings.push_back(where + ": " + code + " has no range");
        }
        out.purposes.push_back(std::move(profile));
    }
    return out;
}

Standards load_standards_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("PARSE_ERROR", "cannot read standards config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_standards(buf.str());
}

std::string serialize_profiles(const Standards& standards) {
    json out = json::array();
    for (const auto& p : standards.purposes) out.push_back(to_json(p));
    return out.dump(2);
}

}  // namespace hydro
