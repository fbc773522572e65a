#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace hydrosense_cli;

int main(int argc, char** argv) {
    CLI::App app{"hydrosense: water-quality data platform"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    g.standards = HYDRO_DEFAULT_STANDARDS;
    std::string format = "table";
    app.add_option("--store-dir", g.store_dir, "Measurement store directory")->envname("HYDRO_STORE_DIR");
    app.add_option("--standards", g.standards, "Standards configuration file")->envname("HYDRO_STANDARDS");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "json"}));

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--listen", serve.listen, "host:port")->envname("HYDRO_LISTEN");
    serve_cmd->add_option("--token", serve.token, "Bearer token for uploads")->envname("HYDRO_UPLOAD_TOKEN");

    std::string ingest_path;
    auto* ingest_cmd = app.add_subcommand("ingest-file", "Ingest a CSV (or .json batch) file");
    ingest_cmd->add_option("path", ingest_path, "File to ingest")->required();

    AssessOptions assess;
    auto* assess_cmd = app.add_subcommand("assess", "Assess a location against a purpose");
    assess_cmd->add_option("--location", assess.location)->required();
    assess_cmd->add_option("--purpose", assess.purpose);

    CorrelateOptions corr;
    auto* corr_cmd = app.add_subcommand("correlate", "Correlate two collection methods at a location");
    corr_cmd->add_option("--location", corr.location)->required();
    corr_cmd->add_option("--parameter", corr.parameter)->required();
    corr_cmd->add_option("--source-a", corr.source_a);
    corr_cmd->add_option("--source-b", corr.source_b);
    corr_cmd->add_option("--from", corr.from);
    corr_cmd->add_option("--to", corr.to);
    corr_cmd->add_option("--tolerance", corr.tolerance_s, "Pairing tolerance in seconds");

    ExportOptions exp;
    auto* export_cmd = app.add_subcommand("export", "Export measurements as CSV");
    export_cmd->add_option("--location", exp.location)->required();
    export_cmd->add_option("--parameter", exp.parameter);
    export_cmd->add_option("--from", exp.from);
    export_cmd->add_option("--to", exp.to);

    auto* standards_cmd = app.add_subcommand("standards", "Standards configuration tools");
    standards_cmd->require_subcommand(1);
    auto* check_cmd = standards_cmd->add_subcommand("check", "Load and reconcile the standards file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }
    g.format = format == "json" ? Format::Json : Format::Table;

    if (*serve_cmd) return run_serve(g, serve);
    if (*ingest_cmd) return run_ingest_file(g, ingest_path, std::cout, std::cerr);
    if (*assess_cmd) return run_assess(g, assess, std::cout, std::cerr);
    if (*corr_cmd) return run_correlate(g, corr, std::cout, std::cerr);
    if (*export_cmd) return run_export(g, exp, std::cout, std::cerr);
    if (*check_cmd) return run_standards_check(g, std::cout, std::cerr);
    return kConfigError;
}
