#pragma once

#include <vector>

#include "awr/grid.hpp"
#include "awr/lame.hpp"
#include "awr/mean_drift.hpp"
#include "awr/model.hpp"
#include "awr/profile.hpp"

namespace awr {

// Largest eigenvalue of a symmetric d x d matrix (row-major, d in {1,2,3}),
// by closed form: the quadratic formula for d = 2 and the trigonometric
// Cardano formula for d = 3 (shift by the trace, scale by the deviatoric
// Frobenius norm, take acos of the normalized determinant). Accurate to
// about 1e-12 relative for well-scaled inputs.
double lambda_max(const double* A, int d);

// Slack of the algebraic kinetic bound
//   (1/2)|w|^2 <= d * lambda_max[w (x) w - B]
// for a traceless symmetric B. The bound holds for every such B because the
// matrix inside has trace |w|^2 and lambda_max >= trace/d. Returns the slack
// (right side minus left side, always >= 0 up to rounding). Throws
// NotTraceless when |trace B| > 1e-12 * max(1, max |B_ij|).
double check_pointwise_inequality(const double* w, const double* B, int d);

// The affine interior connection between the endpoint data: the solenoidal
// momentum part travels the straight line
//   v(t) = (1 - t/T) v0 + (t/T) vT,
// while the flux corrections F (affine path), M (profile/drift source), and
// N[v] (offset coupling) absorb the momentum equation. The kinetic tensor
//   K(t,x) = m (x) m / rho - F + M + N,   m = v + V + grad Phi,
// must stay below the energy level field
//   e(t,x) = Lambda(t) - (d/2) d_t(Phi + P(rho))
// in the lambda_max sense; check_membership quantifies the gap.
struct SubsolutionBundle {
    DensityProfileBundle profile;
    MeanDrift drift;
    ModelFunctions model;

    std::vector<VectorField> v;         // affine path, one field per node
    SymTensorField0 F;                  // time-independent affine flux
    std::vector<SymTensorField0> M, N;  // per-node flux corrections

    std::vector<double> lambda;   // energy level per node
    std::vector<double> dlambda;  // its time slope per node
    std::vector<ScalarField> e;   // energy level field per node
    double eta = 0.0;             // margin the schedule was asked for

    // Energy level between nodes: cubic Hermite on (lambda, dlambda).
    double lambda_at(double t) const;
};

// Builds v, F, M, N (lambda and e stay empty until a schedule is installed).
// Asserts the path invariants: v0/vT solenoidal and mean-free (relative
// 1e-12, throws NotSolenoidal/NonZeroMean), endpoint nodes equal to the data.
SubsolutionBundle assemble_subsolution(const DensityProfileBundle& profile,
                                       const MeanDrift& drift, const ModelFunctions& model,
                                       const VectorField& v0, const VectorField& vT);

// Installs an energy level given per node and rebuilds the e fields,
//   e_k = lambda_k - (d/2)(d_t phi_k + P'(rho_k) d_t rho_k),
// with the analytic time derivatives from the profile (no finite
// differences). Throws BadConfig on a size mismatch.
void install_lambda(SubsolutionBundle& b, const std::vector<double>& lambda,
                    const std::vector<double>& dlambda);

// Margin-based schedule: at every node set
//   lambda_k = max over x of { (d/2) lambda_max[K] + (d/2) d_t(Phi + P) } + eta,
// the smallest spatially constant level that leaves margin eta at that node.
// Slopes come from monotonicity-limited cubic interpolation of the node
// values. Requires eta > 0 (BadConfig otherwise).
void schedule_lambda_margin(SubsolutionBundle& b, double eta);

// Membership scan of the kinetic inequality over the window (tau, T]
// (tau = 0 includes t = 0, making the check cover all of [0, T]).
struct MembershipReport {
    std::vector<double> node_min;  // min over x of e - (d/2) lambda_max[K]
    std::vector<double> node_time; // node times, aligned with node_min
    double margin = 0.0;           // min of node_min over the window
    double min_e = 0.0;            // min over window and x of the e field
    double tau = 0.0;
    bool pass = false;             // margin > 0 and min_e > 0
};

MembershipReport check_membership(const SubsolutionBundle& b, double tau = 0.0);

// Energy-admissible level schedule for a static density (time-independent
// rho, no acoustic potential, no momentum mean). The total energy of a
// solution with kinetic level Lambda moves by the offset coupling alone;
// its magnitude is bounded by
//   BOUND(L) = |T^d| rho_max |grad h(rho)|_inf (sqrt(2L/rho_min) + offset_inf)
//              * sqrt(2L/rho_min),
// so integrating (|T^d|/2) Lambda' = -BOUND(Lambda) certifies a
// non-increasing energy. The sup norms are taken over the grid: the
// Frobenius norm of grad h(rho) = h'(rho) (x) grad rho, and the Euclidean
// norm of h(rho) + grad p(rho).
struct AdmissibleConstants {
    double vol = 0.0;
    double rho_min = 0.0, rho_max = 0.0;
    double grad_h_inf = 0.0;  // sup |h'(rho) (x) grad rho|_F
    double offset_inf = 0.0;  // sup |h(rho) + grad p(rho)|
    double bound(double lambda) const;
};

struct AdmissibleSchedule {
    TimeGrid time;
    AdmissibleConstants constants;
    std::vector<double> lambda;   // positive, non-increasing
    std::vector<double> dlambda;  // analytic slope -(2/vol) bound(lambda)
    // Max over steps of (vol/2)(lambda_{k+1}-lambda_k)/dt + bound(lambda_{k+1});
    // <= 0 up to integrator error because bound decreases along the solution.
    double certificate_defect = 0.0;
};

// Integrates the level ODE with classical fourth-order Runge-Kutta,
// `substeps` equal steps per node interval. Throws LambdaDepleted if the
// level reaches zero before T, BadConfig for lambda0 <= 0 or substeps < 1.
AdmissibleSchedule schedule_lambda_admissible(const ScalarField& rho,
                                              const ModelFunctions& model, double lambda0,
                                              const TimeGrid& tg, int substeps = 64);

// Pointwise energy density E = (1/2) rho |u + h(rho) + grad p(rho)|^2 and
// its integral over the torus.
struct EnergyField {
    ScalarField E;
    double total = 0.0;
};

EnergyField energy_field(const ScalarField& rho, const VectorField& u,
                         const ModelFunctions& model);

} // namespace awr
