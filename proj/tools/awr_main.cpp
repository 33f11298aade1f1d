/* Command-line front end. Subcommands:
 *   decompose   split endpoint momenta into solenoidal + mean + gradient parts
 *   build       construct a subsolution bundle from a run configuration
 *   verify      re-check a bundle directory against its recorded tolerances
 *   energy      tabulate the bundle's total energy and its certified envelope
 *   check-1d    one-dimensional model-equivalence residuals
 *   export-csv  dump a binary field file as CSV
 * Exit codes: 0 pass, 1 verification failure, 2 configuration or data error.
 */

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "awr/errors.hpp"
#include "awr/parallel.hpp"
#include "awr/pipeline.hpp"

namespace {

awr::RunConfig load_config(const std::string& path, const std::string& out_override) {
    awr::RunConfig cfg = awr::load_run_config(path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral subsolution toolkit for the dissipative "
                 "second-order traffic model"};
    app.require_subcommand(1);
    app.fallthrough(); // allow --threads after the subcommand name

    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware default)");

    std::string config_path, out_path, bundle_dir, field_path;
    bool force = false;

    CLI::App* decompose = app.add_subcommand(
        "decompose", "write the momentum decomposition of the configured endpoint data");
    decompose->add_option("--config", config_path, "run configuration (JSON)")->required();
    decompose->add_option("--out", out_path, "output directory")->required();

    CLI::App* build =
        app.add_subcommand("build", "construct and persist a subsolution bundle");
    build->add_option("--config", config_path, "run configuration (JSON)")->required();
    build->add_option("--out", out_path, "output directory (overrides config 'output')");
    build->add_flag("--force", force,
                    "overwrite an existing bundle; skip compatibility enforcement");

    CLI::App* verify = app.add_subcommand("verify", "re-check a persisted bundle");
    verify->add_option("bundle", bundle_dir, "bundle directory")->required();

    CLI::App* energy =
        app.add_subcommand("energy", "energy history and admissibility verdict");
    energy->add_option("bundle", bundle_dir, "bundle directory")->required();

    CLI::App* check1d = app.add_subcommand(
        "check-1d", "one-dimensional equivalence of the offset and viscous forms");
    check1d->add_option("--config", config_path, "run configuration (JSON)")->required();

    CLI::App* export_csv = app.add_subcommand("export-csv", "dump a field file as CSV");
    export_csv->add_option("field", field_path, "binary field file")->required();
    export_csv->add_option("--out", out_path, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    if (threads > 0) awr::set_threads(threads);

    try {
        if (decompose->parsed())
            return awr::run_decompose(load_config(config_path, ""), out_path, std::cout);
        if (build->parsed())
            return awr::run_build(load_config(config_path, out_path), force, std::cout)
                .exit_code;
        if (verify->parsed()) return awr::run_verify(bundle_dir, std::cout).exit_code;
        if (energy->parsed()) return awr::run_energy(bundle_dir, std::cout).exit_code;
        if (check1d->parsed())
            return awr::run_check_1d(load_config(config_path, ""), std::cout).exit_code;
        if (export_csv->parsed()) return awr::run_export_csv(field_path, out_path, std::cout);
    } catch (const awr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2; // unreachable: require_subcommand(1)
}
