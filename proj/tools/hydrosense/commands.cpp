#include "commands.hpp"

#include <signal.h>
#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "hydro/api.hpp"
#include "hydro/codec.hpp"
#include "hydro/error.hpp"
#include "hydro/ingest.hpp"
#include "hydro/standards.hpp"
#include "hydro/store.hpp"

namespace hydrosense_cli {

using namespace hydro;

namespace {

const std::set<std::string> kConfigCodes = {"PARSE_ERROR",  "CONFLICT",      "UNKNOWN_PARAMETER_IN_RANGE",
                                            "DUPLICATE_PURPOSE", "INVALID_CONFIG", "STORAGE_IO",
                                            "STORE_LOCKED", "BIND_FAILED"};

int fail(const Error& e, std::ostream& err) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kConfigCodes.contains(e.code()) ? kConfigError : kDomainError;
}

std::shared_ptr<const Standards> load_config(const GlobalOptions& g) {
    return std::make_shared<const Standards>(load_standards_file(g.standards));
}

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string range_text(const std::optional<double>& lo, const std::optional<double>& hi) {
    return (lo ? "[" + num(*lo) : std::string("(-inf")) + ", " + (hi ? num(*hi) + "]" : std::string("inf)"));
}

std::optional<Instant> instant_arg(const std::optional<std::string>& text, const char* name) {
    if (!text) return std::nullopt;
    auto t = parse_rfc3339(*text);
    if (!t) throw Error("BAD_TIMESTAMP", std::string("--") + name + " is not an RFC 3339 instant");
    return t;
}

SourceMethod source_arg(const std::string& text) {
    auto s = parse_source(text);
    if (!s) throw Error("BAD_SOURCE", "source must be LAB, SENSOR or MOBILE_APP, got '" + text + "'");
    return *s;
}

bool use_color(const std::ostream& out) {
    return &out == &std::cout && ::isatty(STDOUT_FILENO) && std::getenv("NO_COLOR") == nullptr;
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error("BIND_FAILED", "--listen must be host:port");
    int port = 0;
    const auto digits = listen.substr(colon + 1);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc() || p != digits.data() + digits.size() || port < 0 || port > 65535)
        throw Error("BIND_FAILED", "bad port in --listen '" + listen + "'");
    return {listen.substr(0, colon), port};
}

void print_report_table(const IngestReport& r, std::ostream& out) {
    out << "accepted: " << r.accepted << "\nrejected: " << r.rejected << "\ninserted: " << r.inserted
        << "\nreplaced: " << r.replaced << "\nnew locations: " << r.new_locations.size() << "\n";
    for (const auto& id : r.new_locations) out << "  + " << id << "\n";
    for (const auto& e : r.rejections) out << "  row " << e.row << ": " << e.code << " " << e.detail << "\n";
    if (r.storage_error) out << "storage error: " << *r.storage_error << "\n";
}

}  // namespace

int run_serve(const GlobalOptions& g, const ServeOptions& o) {
    // Block the shutdown/reload signals before any worker thread exists so
    // that only the sigwait loop below receives them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGHUP);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    try {
        StandardsHandle standards(load_config(g));
        Store store(g.store_dir);
        if (o.token.empty()) std::cerr << "warning: no upload token configured; write endpoints will return 401\n";
        ApiService api(store, standards, ApiConfig{o.token});
        HttpServer server(api);
        const auto [host, port] = split_listen(o.listen);
        const int bound = server.bind(host, port);
        server.start();
        std::cout << "listening on http://" << host << ":" << bound << std::endl;

        while (true) {
            int sig = 0;
            sigwait(&signals, &sig);
            if (sig != SIGHUP) break;
            try {
                standards.reload(load_config(g));
                std::cerr << "standards reloaded (" << standards.get()->version << ")\n";
            } catch (const Error& e) {
                std::cerr << "standards reload failed, keeping previous set: " << e.code() << ": " << e.what() << "\n";
            }
        }
        server.stop();
        return kOk;
    } catch (const Error& e) {
        return fail(e, std::cerr);
    }
}

int run_ingest_file(const GlobalOptions& g, const std::string& path, std::ostream& out, std::ostream& err) {
    try {
        const auto standards = load_config(g);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("NOT_FOUND", "cannot read " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        const bool json_batch = path.size() >= 5 && path.ends_with(".json");
        const auto batch = json_batch ? parse_json_batch(buf.str()) : parse_csv(buf.str());

        Store store(g.store_dir);
        const auto report = ingest_batch(batch, standards->registry, store, Instant::now());
        if (g.format == Format::Json) {
            out << render(to_json(report));
        } else {
            print_report_table(report, out);
        }
        return report.accepted > 0 && report.rejected == 0 ? kOk : kDomainError;
    } catch (const Error& e) {
        return fail(e, err);
    }
}

int run_assess(const GlobalOptions& g, const AssessOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const auto standards = load_config(g);
        Store store(g.store_dir);
        const auto doc = assessment_document(store, *standards, o.location, o.purpose);
        if (g.format == Format::Json) {
            out << render(doc);
            return kOk;
        }

        const bool color = use_color(out);
        out << "location: " << doc["location_id"].get<std::string>() << "  purpose: " << doc["purpose"].get<std::string>()
            << "  as of: " << doc["as_of"].get<std::string>() << "\n";
        out << std::left << "  " << std::setw(12) << "PARAMETER" << std::setw(14) << "VALUE" << std::setw(11) << "UNIT"
            << std::setw(18) << "RANGE" << std::setw(17) << "STATUS" << "READ AT\n";
        for (const auto& e : doc["entries"]) {
            const auto code = e["parameter"].get<std::string>();
            const auto status = e["status"].get<std::string>();
            const bool unsafe = status.starts_with("UNSAFE");
            const auto* param = standards->registry.find(code);
            std::string range = "-";
            if (!e["range"].is_null()) {
                auto bound = [](const nlohmann::json& v) {
                    return v.is_null() ? std::optional<double>() : std::optional<double>(v.get<double>());
                };
                range = range_text(bound(e["range"]["min"]), bound(e["range"]["max"]));
            }
            std::ostringstream row;
            row << std::left << (e["relevant"].get<bool>() ? "* " : "  ") << std::setw(12) << code << std::setw(14)
                << (e["latest_value"].is_null() ? std::string("-") : num(e["latest_value"].get<double>()))
                << std::setw(11) << (param ? param->canonical_unit : std::string()) << std::setw(18) << range
                << std::setw(17) << (unsafe ? status + " !!" : status)
                << (e["reading_timestamp"].is_null() ? std::string("-") : e["reading_timestamp"].get<std::string>());
            out << (unsafe && color ? "\033[31m" + row.str() + "\033[0m" : row.str()) << "\n";
        }
        return kOk;
    } catch (const Error& e) {
        return fail(e, err);
    }
}

int run_correlate(const GlobalOptions& g, const CorrelateOptions& o, std::ostream& out, std::ostream& err) {
    try {
        Store store(g.store_dir);
        const auto a = source_arg(o.source_a), b = source_arg(o.source_b);
        if (a == b) throw Error("SAME_SOURCE", "--source-a and --source-b must differ");
        if (!store.has_location(o.location)) throw Error("UNKNOWN_LOCATION", "unknown location '" + o.location + "'");
        auto from = instant_arg(o.from, "from");
        auto to = instant_arg(o.to, "to");
        if (!from || !to) {
            const auto all = store.readings(o.location, o.parameter, Instant::from_micros(INT64_MIN / 2),
                                            Instant::from_micros(INT64_MAX / 2));
            if (!from) from = all.empty() ? Instant{} : all.front().timestamp;
            if (!to) to = all.empty() ? Instant::from_seconds(1) : all.back().timestamp + Instant::duration(1);
        }
        const auto report = correlate(store, o.location, o.parameter, a, b, *from, *to, o.tolerance_s);
        if (g.format == Format::Json) {
            out << render(to_json(report));
        } else {
            out << "location: " << report.location_id << "\nparameter: " << report.parameter
                << "\nsources: " << to_string(report.source_a) << " vs " << to_string(report.source_b)
                << "\ntolerance: " << num(report.tolerance_s) << " s\npairs: " << report.n_pairs << "\nr: "
                << (report.r ? num(*report.r) : "n/a (" + report.reason.value_or("") + ")") << "\n";
        }
        return kOk;
    } catch (const Error& e) {
        return fail(e, err);
    }
}

int run_export(const GlobalOptions& g, const ExportOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const auto from = instant_arg(o.from, "from");
        const auto to = instant_arg(o.to, "to");
        if (from && to && !(*from < *to)) throw Error("BAD_RANGE", "--from must be earlier than --to");
        Store store(g.store_dir);
        const auto location = store.find_location(o.location);
        if (!location) throw Error("UNKNOWN_LOCATION", "unknown location '" + o.location + "'");
        auto rows = store.measurements(o.location, o.parameter, from, to);
        for (auto& m : rows) {
            if (!m.point) m.point = location->point;
        }
        out << serialize_csv(rows);
        return kOk;
    } catch (const Error& e) {
        return fail(e, err);
    }
}

int run_standards_check(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    try {
        const auto s = load_config(g);
        if (g.format == Format::Json) {
            out << render(nlohmann::json{{"version", s->version},
                                         {"parameters", s->registry.size()},
                                         {"ranged_parameters", s->ranged_parameter_count()},
                                         {"purposes", s->purposes.size()},
                                         {"warnings", s->warnings}});
            return kOk;
        }
        out << "standards " << g.standards << " (version " << s->version << ")\n"
            << "parameters: " << s->registry.size() << " (" << s->ranged_parameter_count() << " with reconciled ranges)\n"
            << "unit rules: " << s->registry.unit_rules().size() << "\npurposes: " << s->purposes.size() << "\n";
        for (const auto& p : s->purposes) {
            out << "  " << p.id << (&p == s->default_purpose() ? " (default)" : "") << ": "
                << p.relevant_parameters.size() << " relevant, " << p.ranges.size() << " ranges\n";
        }
        out << "warnings: " << s->warnings.size() << "\n";
        for (const auto& w : s->warnings) out << "  " << w << "\n";
        return kOk;
    } catch (const Error& e) {
        return fail(e, err);
    }
}

}  // namespace hydrosense_cli
