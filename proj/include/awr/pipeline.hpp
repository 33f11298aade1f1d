#pragma once

#include <ostream>
#include <string>

#include "awr/mean_drift.hpp"
#include "awr/model.hpp"
#include "awr/profile.hpp"
#include "awr/subsolution.hpp"
#include "awr/verify.hpp"

namespace awr {

/* Run configuration, parsed from a single JSON document. Unknown keys are
 * rejected with their path; every tolerance must be positive. All physical
 * quantities are nondimensional on the period-2 torus. */
struct RunConfig {
    // grid {d, n}
    int dim = 2;
    int n = 64;
    // time {T, n_t}
    double T = 1.0;
    int n_t = 33;
    // model {family, gamma, rho_bar, table, h {kind, c}}
    std::string family = "power"; // power | singular | constant | table
    double gamma = 2.0;
    double rho_bar = 0.0;
    std::string table_path;
    HSpec h;
    // data: a built-in scenario or four endpoint field files
    std::string scenario; // static-admissible | two-mode-transfer | incompatible-demo
    std::string rho0_path, u0_path, rhoT_path, uT_path;
    // shapes {delta0, s0, sT, theta}
    ShapeParams shapes;
    double theta = 0.05;
    // schedule {mode, eta, lambda0, substeps, tau}
    std::string schedule_mode = "theorem1"; // theorem1 | admissible
    double eta = 1.0;
    double lambda0 = 1.0;
    int substeps = 64;
    double tau = 0.0;
    // tolerances {strong, weak, conserved_mass, conserved_momentum, trace,
    //             energy, mass, momentum, endpoint}
    VerifyTolerances tol;
    double mass_tol = 1e-10;
    double momentum_tol = 1e-8;
    double endpoint_tol = 1e-8;
    // verify {max_mode, require_energy_monotone (mirrored into tol)}
    int max_mode = -1;
    // output
    std::string out_dir;

    bool has_data() const { return !scenario.empty() || !rho0_path.empty(); }
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg); // canonical echo, reparseable

ModelFunctions build_model(const RunConfig& cfg);

// Endpoint data from the named scenario or from the configured field files.
DataPair make_run_data(const RunConfig& cfg);

/* Bundle directory layout:
 *   meta.json        format tag, canonical config echo, derived constants
 *   lambda.csv       t, lambda, dlambda
 *   drift.csv        t, V components, dV components
 *   membership.json  margin scan result
 *   F.field          time-independent flux
 *   nodes/           per-node fields: rho, drho, phi, dphi, v, M, N
 * cmd_verify adds report.json and conserved.csv; cmd_energy adds energy.csv.
 * A .lock file guards against concurrent writers. */
struct LoadedBundle {
    RunConfig cfg;
    SubsolutionBundle bundle;
    MembershipReport membership; // as recorded by the build
};

void write_bundle_dir(const std::string& dir, const RunConfig& cfg, const SubsolutionBundle& b,
                      const MembershipReport& mem, const AdmissibleSchedule* adm, bool force);
LoadedBundle read_bundle_dir(const std::string& dir);

/* Subcommand drivers. Each returns the process exit code: 0 on pass, 1 on a
 * verification failure. Configuration and data errors throw awr::Error, which
 * the CLI maps to exit code 2. Progress and verdicts go to `log`. */
struct BuildOutcome {
    int exit_code = 0;
    std::string dir;
    MembershipReport membership;
};
BuildOutcome run_build(const RunConfig& cfg, bool force, std::ostream& log);

struct VerifyOutcome {
    int exit_code = 0;
    VerificationReport report;
    MembershipReport membership;
};
VerifyOutcome run_verify(const std::string& dir, std::ostream& log);

struct EnergyOutcome {
    int exit_code = 0;
    EnergyVerdict measured;
    bool has_envelope = false;
    EnergyVerdict envelope;
};
EnergyOutcome run_energy(const std::string& dir, std::ostream& log);

int run_decompose(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);

struct Check1dOutcome {
    int exit_code = 0;
    Equivalence1DReport report;
};
Check1dOutcome run_check_1d(const RunConfig& cfg, std::ostream& log);

int run_export_csv(const std::string& field_path, const std::string& out_path,
                   std::ostream& log);

} // namespace awr
