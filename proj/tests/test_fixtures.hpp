#pragma once

#include <cmath>

#include "awr/mean_drift.hpp"
#include "awr/model.hpp"
#include "awr/profile.hpp"
#include "awr/spectral.hpp"
#include "awr/subsolution.hpp"

namespace awr::testutil {

inline ScalarField sine_density(const Grid& g, double base, double amp, int axis) {
    return make_field(g, [=](const double* x) {
        return base + amp * std::sin(3.14159265358979323846 * x[axis]);
    });
}

// The small end-to-end fixture: different single-mode endpoint densities and
// crossed single-mode velocities, so every ingredient of the bundle (profile
// bumps, mean drift, all three flux corrections) is active.
struct TwoModeFixture {
    Grid g;
    ModelFunctions model;
    DataPair data;
    DensityProfileBundle profile;
    MeanDrift drift;

    explicit TwoModeFixture(int n, int n_t) : g(2, n) {
        constexpr double pi = 3.14159265358979323846;
        HSpec h;
        h.kind = HSpec::Kind::Linear;
        h.c = {0.12, -0.07};
        model = make_power_law(2, 2.0, h);
        const ScalarField rho0 = sine_density(g, 2.0, 0.5, 0);
        const ScalarField rhoT = sine_density(g, 2.0, 0.5, 1);
        const VectorField u0 = make_vector_field(g, 2, [pi](const double* x, double* u) {
            u[0] = 1.2 * std::sin(pi * x[1]);
            u[1] = 0.0;
        });
        const VectorField uT = make_vector_field(g, 2, [pi](const double* x, double* u) {
            u[0] = 0.0;
            u[1] = -0.8 * std::sin(pi * x[0]);
        });
        data = make_data_pair(rho0, u0, rhoT, uT);
        profile = build_profile(data.rho0, data.rhoT, data.parts0.phi, data.partsT.phi,
                                TimeGrid(1.0, n_t));
        // The coarse node count keeps this fixture fast; the drift endpoint
        // identity then carries visible quadrature error, hence the loose tol.
        drift = build_mean_drift(profile, model, data.parts0.V, 1e-2);
    }

    SubsolutionBundle bundle() const {
        return assemble_subsolution(profile, drift, model, data.parts0.v, data.partsT.v);
    }
};

} // namespace awr::testutil
