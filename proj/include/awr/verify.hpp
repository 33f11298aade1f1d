#pragma once

#include <vector>

#include "awr/grid.hpp"
#include "awr/model.hpp"
#include "awr/profile.hpp"
#include "awr/subsolution.hpp"

namespace awr {

/* Weak-form residual evaluation. Test functions are tensor products
 *   phi(t, x) = psi(t) e^{-i pi m . x},   |m|_inf <= max_mode,
 * where psi is the C^2 polynomial bump 64 (s(1-s))^3 scaled to a node-aligned
 * time window (full span, halves, and a centered window). Space integrals are
 * exact via the FFT; time integrals treat the per-mode coefficient series as
 * piecewise linear between nodes and integrate psi and psi' against it with
 * per-interval Gauss-Legendre rules that are exact for that product. The
 * reported weak residual is therefore the exact weak-form residual of the
 * piecewise-linear-in-time, spectral-in-space representative of the data, and
 * the residual functional is exactly linear in the fields. */
struct WeakResidualReport {
    double weak_max = 0.0; // max |integral| over windows x modes (x directions)
    double weak_rms = 0.0; // rms over the same set
    double strong = -1.0;  // sup-norm of the pointwise residual; < 0 if no rate given
    int modes = 0;
    int windows = 0;
};

// Mass equation residuals: weak form pairs (rho, mom = rho u) against
// (d_t phi, grad phi); the strong form needs the analytic rate series d_t rho.
WeakResidualReport weak_residual_continuity(const TimeGrid& tg,
                                            const std::vector<ScalarField>& rho,
                                            const std::vector<VectorField>& mom, int max_mode,
                                            const std::vector<ScalarField>& drho = {});

// Preferred-velocity momentum equation d_t(rho w) + div(rho w (x) u) = 0,
// divergence contracting the transport slot. Vector test functions run over
// every coordinate direction; products rho w_c u_j are plain pointwise
// (unfiltered) so the residual reflects the literal fields.
WeakResidualReport weak_residual_momentum(const TimeGrid& tg,
                                          const std::vector<VectorField>& wmom,
                                          const std::vector<VectorField>& u, int max_mode,
                                          const std::vector<VectorField>& dwmom = {});

// Path identity of the affine interior connection: d_t v + div(F) = 0 with the
// constant rate (vT - v0)/T; strong sup-norm plus the weak residual.
struct TransportResidualReport {
    double strong = 0.0;
    double weak_max = 0.0;
    double weak_rms = 0.0;
};

TransportResidualReport affine_transport_residual(const SubsolutionBundle& b, int max_mode);

// Trace-free kinetic dyad m (.) m / rho = m (x) m / rho - (|m|^2/(d rho)) I,
// materialized with full storage so the zero trace is measurable.
MatField traceless_dyad(const VectorField& m, const ScalarField& rho);
double max_trace_norm(const MatField& T); // sup over x of |sum_i T_ii|

// The full and trace-free momentum-flux forms differ by
//   (d_t(Phi + P) + |m|^2 / (d rho)) I,
// which is spatially constant exactly when the kinetic field matches the
// energy level. Returns the sup deviation of that scalar from its mean.
double recombination_defect(const VectorField& m, const ScalarField& rho,
                            const ScalarField& dt_phi_P);

// Time series of the conserved integrals: total mass and total preferred
// momentum (integral of rho w).
struct ConservedReport {
    std::vector<double> time;
    std::vector<double> mass;
    std::vector<std::vector<double>> momentum; // per node, dim components
    double mass_drift = 0.0;                   // max |mass(t) - mass(0)|
    double momentum_drift = 0.0;               // max over t, components
};

ConservedReport conserved_quantities(const TimeGrid& tg, const std::vector<ScalarField>& rho,
                                     const std::vector<VectorField>& wmom);

// Discrete monotonicity monitor for a total-energy series: PASS when every
// step increment stays below tol and no node exceeds the initial value by
// more than tol (no initial jump).
struct EnergyVerdict {
    std::vector<double> time;
    std::vector<double> total;
    double max_uptick = 0.0;     // most positive node-to-node increment
    int uptick_node = -1;        // interval index attaining it
    double initial_excess = 0.0; // max over t of total(t) - total(0)
    double tol = 0.0;
    bool pass = false;
};

EnergyVerdict energy_monitor(const TimeGrid& tg, const std::vector<double>& totals,
                             double tol = 1e-10);
EnergyVerdict energy_monitor(const TimeGrid& tg, const std::vector<ScalarField>& rho,
                             const std::vector<VectorField>& u, const ModelFunctions& model,
                             double tol = 1e-10);

// Bookkeeping series for the admissible level schedule: kinetic cap
// (vol/2) lambda plus the right-endpoint accumulation of the coupling bound;
// non-increasing up to the step certificate defect.
std::vector<double> admissible_energy_envelope(const AdmissibleSchedule& s);

// Physical series reassembled from the bundle pieces: momentum
// m = v + V + grad Phi, velocity u = m / rho, preferred velocity w = u +
// h(rho) + grad p(rho), preferred momentum rho w = m + rho (h + grad p).
struct BundleSeries {
    std::vector<VectorField> mom, u, w, wmom;
};

BundleSeries bundle_series(const SubsolutionBundle& b);

// Consolidated bundle verification. Verdicts come from the stored tolerances;
// the energy verdict only gates `pass` when require_energy_monotone is set
// (the interior connection need not dissipate).
struct VerifyTolerances {
    double strong = 1e-9;             // pointwise residual cap
    double weak = 1e-4;               // weak residual cap (time-interpolation limited)
    double conserved_mass = 1e-10;    // mass is constant by construction
    double conserved_momentum = 2e-4; // mean-drift time quadrature limits this one
    double trace = 1e-12;             // dyad trace cap
    double energy = 1e-10;            // monotonicity slack
    bool require_energy_monotone = false;
};

struct VerificationReport {
    WeakResidualReport continuity;
    TransportResidualReport transport;
    double dyad_trace_max = 0.0;
    double offset_defect = 0.0; // sup |w - u - h(rho) - grad p(rho)|
    ConservedReport conserved;
    EnergyVerdict energy;
    VerifyTolerances tol;
    bool continuity_ok = false;
    bool transport_ok = false;
    bool trace_ok = false;
    bool conserved_ok = false;
    bool energy_ok = false;
    bool pass = false;
};

// max_mode < 0 selects the default band n/4.
VerificationReport verify_bundle(const SubsolutionBundle& b, int max_mode = -1,
                                 const VerifyTolerances& tol = {});

} // namespace awr
