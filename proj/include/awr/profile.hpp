#pragma once

#include <functional>
#include <vector>

#include "awr/grid.hpp"

namespace awr {

// Scalar time shape with closed-form first and second derivatives. The
// profile construction needs three of them:
//   H  : monotone ramp, H(0) = 1, H(T) = 0, H'(0) = H'(T) = 0;
//   Z0 : bump supported in [0, s0], Z0(0) = 0, Z0'(0) = -1, |Z0| < delta;
//   ZT : bump supported in [sT, T], ZT(T) = 0, ZT'(T) = -1, |ZT| < delta.
// All three are C^2 on [0, T]; piecewise polynomials so the derivatives used
// downstream are exact, not finite differences.
struct TimeShape {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};

struct TimeShapes {
    double T = 0.0;
    double delta = 0.0;   // amplitude cap obeyed by both bumps
    double s0 = 0.0;      // Z0 support is [0, min(s0, 9*delta)]
    double sT = 0.0;      // ZT support is [max(sT, T - 9*delta), T]
    TimeShape H, Z0, ZT;
    double max_Z0 = 0.0;  // exact sup norms (27/256 of the bump widths)
    double max_ZT = 0.0;
};

// Throws BadWindow unless 0 < s0 < sT < T, BadConfig for delta <= 0.
TimeShapes make_time_shapes(double T, double delta, double s0, double sT);

// Uniform time grid on [0, T] with an odd node count (composite Simpson
// needs an even panel count; endpoint nodes are included).
struct TimeGrid {
    double T = 1.0;
    int n_t = 33;

    TimeGrid() = default;
    TimeGrid(double T_, int n_t_);
    double dt() const { return T / (n_t - 1); }
    double node(int k) const { return k == n_t - 1 ? T : T * k / (n_t - 1); }
};

// Bump window placement for the profile; delta0 <= 0 selects the automatic
// starting amplitude 0.1 * inf(rho) / (1 + max |lap phi|).
struct ShapeParams {
    double s0 = -1.0;     // < 0: default T/4
    double sT = -1.0;     // < 0: default 3T/4
    double delta0 = 0.0;  // <= 0: automatic
};

// Density path from rho0 to rhoT:
//   rho(t) = H(t) rho0 + (1 - H(t)) rhoT + Z0(t) lap(phi0) + ZT(t) lap(phiT)
// together with its exact time derivatives and the acoustic potentials
// phi(t) = poisson_solve(-d_t rho), d_t phi = poisson_solve(-d_tt rho).
// The bump terms make d_t rho match -lap(phi0) at t = 0 and -lap(phiT) at
// t = T, so the continuity equation holds at the endpoints with the data's
// own potentials.
struct DensityProfileBundle {
    Grid grid{2, 8};
    TimeGrid time;
    TimeShapes shapes;
    double delta = 0.0;    // bump amplitude finally accepted
    double theta = 0.0;    // positivity margin parameter used
    double rho_min = 0.0;  // min over nodes and grid points
    double mass = 0.0;     // integrate(rho(t)), t-independent

    ScalarField rho0, rhoT;          // endpoint data
    ScalarField lap_phi0, lap_phiT;  // endpoint potentials' Laplacians

    std::vector<ScalarField> rho;      // one field per time node
    std::vector<ScalarField> drho;     // d_t rho
    std::vector<ScalarField> ddrho;    // d_tt rho
    std::vector<ScalarField> phi;      // zero-mean acoustic potential
    std::vector<ScalarField> dphi;     // d_t phi

    // Closed-form evaluation between nodes (the profile is analytic in t).
    ScalarField rho_at(double t) const;
    ScalarField drho_at(double t) const;
    ScalarField ddrho_at(double t) const;
};

// Builds the bundle. The bump amplitude starts at delta0 (or the automatic
// value) and is halved until the excursion bound keeps
//   inf rho >= (1 - theta) * min(inf rho0, inf rhoT).
// Throws IncompatibleMass when the endpoint integrals disagree (relative
// 1e-10), PositivityFailure when the data has no positive infimum or no
// admissible amplitude exists, BadWindow/BadConfig for bad shape parameters.
DensityProfileBundle build_profile(const ScalarField& rho0, const ScalarField& rhoT,
                                   const ScalarField& phi0, const ScalarField& phiT,
                                   const TimeGrid& tg, const ShapeParams& sp = {},
                                   double theta = 0.05);

} // namespace awr
