#pragma once

#include <vector>

#include "awr/grid.hpp"
#include "awr/model.hpp"
#include "awr/profile.hpp"
#include "awr/spectral.hpp"

namespace awr {

// Endpoint data with its momentum decompositions. The solenoidal parts seed
// the affine path, the constants seed the mean drift, and the potentials
// seed the density profile.
struct DataPair {
    ScalarField rho0, rhoT;
    VectorField u0, uT;
    VectorField mom0, momT;        // rho * u
    HelmholtzParts parts0, partsT; // mom = v + V + grad(phi)
};

DataPair make_data_pair(const ScalarField& rho0, const VectorField& u0,
                        const ScalarField& rhoT, const VectorField& uT);

// Necessary conditions on the endpoint data: equal mass, positive density,
// and the momentum balance
//   int rhoT uT - int rho0 u0 = int rho0 h(rho0) - int rhoT h(rhoT).
struct CompatibilityReport {
    double mass0 = 0.0, massT = 0.0;
    double mass_defect = 0.0;                 // |massT - mass0|
    std::vector<double> momentum_defect;      // per component
    bool positivity_ok = false;
    bool mass_ok = false;
    bool momentum_ok = false;
    bool pass = false;
};

CompatibilityReport check_compatibility(const DataPair& data, const ModelFunctions& model,
                                        double mass_tol = 1e-10,
                                        double momentum_tol = 1e-8);

// Spatial mean of the momentum along the profile, driven by the offset:
//   V'(t) = -(1/|T^d|) int (h(rho) + rho h'(rho)) d_t rho dx,
// accumulated with composite Simpson from V(0) = V0. Between nodes the mean
// is the cubic Hermite interpolant of the stored values and slopes.
struct MeanDrift {
    TimeGrid time;
    int dim = 0;
    std::vector<std::vector<double>> V;  // n_t entries of dim components
    std::vector<std::vector<double>> dV;
    double endpoint_defect = 0.0;             // endpoint identity residual (inf norm)

    std::vector<double> at(double t) const;
};

// endpoint_tol guards the identity
//   |T^d| V(T) = |T^d| V0 - int rhoT h(rhoT) + int rho0 h(rho0)
// whose residual is pure time-quadrature error; EndpointMismatch when it
// exceeds endpoint_tol relative to max(1, |rhs|).
MeanDrift build_mean_drift(const DensityProfileBundle& profile, const ModelFunctions& model,
                           const std::vector<double>& V0, double endpoint_tol = 1e-8);

} // namespace awr
