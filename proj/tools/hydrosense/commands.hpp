#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace hydrosense_cli {

enum ExitCode : int { kOk = 0, kDomainError = 1, kConfigError = 2 };

enum class Format { Table, Json };

struct GlobalOptions {
    std::string store_dir = "./hydrosense-data";
    std::string standards;
    Format format = Format::Table;
};

struct ServeOptions {
    std::string listen = "127.0.0.1:8080";
    std::string token;
};

struct AssessOptions {
    std::string location;
    std::optional<std::string> purpose;
};

struct CorrelateOptions {
    std::string location;
    std::string parameter;
    std::string source_a = "LAB";
    std::string source_b = "SENSOR";
    std::optional<std::string> from;
    std::optional<std::string> to;
    double tolerance_s = 3600.0;
};

struct ExportOptions {
    std::string location;
    std::optional<std::string> parameter;
    std::optional<std::string> from;
    std::optional<std::string> to;
};

int run_serve(const GlobalOptions& g, const ServeOptions& o);
int run_ingest_file(const GlobalOptions& g, const std::string& path, std::ostream& out, std::ostream& err);
int run_assess(const GlobalOptions& g, const AssessOptions& o, std::ostream& out, std::ostream& err);
int run_correlate(const GlobalOptions& g, const CorrelateOptions& o, std::ostream& out, std::ostream& err);
int run_export(const GlobalOptions& g, const ExportOptions& o, std::ostream& out, std::ostream& err);
int run_standards_check(const GlobalOptions& g, std::ostream& out, std::ostream& err);

}  // namespace hydrosense_cli
