#include "awr/mean_drift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "awr/errors.hpp"

namespace awr {

DataPair make_data_pair(const ScalarField& rho0, const VectorField& u0,
                        const ScalarField& rhoT, const VectorField& uT) {
    require_same_grid(rho0.grid, rhoT.grid, "endpoint data");
    require_same_grid(rho0.grid, u0.grid, "endpoint data");
    require_same_grid(rho0.grid, uT.grid, "endpoint data");
    DataPair d;
    d.rho0 = rho0;
    d.rhoT = rhoT;
    d.u0 = u0;
    d.uT = uT;
    d.mom0 = multiply(rho0, u0);
    d.momT = multiply(rhoT, uT);
    d.parts0 = helmholtz(d.mom0);
    d.partsT = helmholtz(d.momT);
    return d;
}

namespace {

// int rho h(rho) dx, one entry per component.
std::vector<double> offset_momentum(const ScalarField& rho, const ModelFunctions& model) {
    const int d = rho.grid.dim;
    std::vector<double> out(d, 0.0);
    ScalarField tmp(rho.grid);
    for (int c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < rho.v.size(); ++i)
            tmp.v[i] = rho.v[i] * model.h_value(c, rho.v[i]);
        out[c] = integrate(tmp);
    }
    return out;
}

} // namespace

CompatibilityReport check_compatibility(const DataPair& data, const ModelFunctions& model,
                                        double mass_tol, double momentum_tol) {
    CompatibilityReport r;
    r.mass0 = integrate(data.rho0);
    r.massT = integrate(data.rhoT);
    r.mass_defect = std::abs(r.massT - r.mass0);
    r.mass_ok = r.mass_defect <= mass_tol * std::abs(r.mass0);
    r.positivity_ok = *std::min_element(data.rho0.v.begin(), data.rho0.v.end()) > 0.0 &&
                      *std::min_element(data.rhoT.v.begin(), data.rhoT.v.end()) > 0.0;

    const int d = data.rho0.grid.dim;
    const auto off0 = offset_momentum(data.rho0, model);
    const auto offT = offset_momentum(data.rhoT, model);
    r.momentum_defect.resize(d);
    double worst = 0.0;
    double scale = 1.0;
    for (int c = 0; c < d; ++c) {
        const double lhs = integrate(data.momT.comp[c]) - integrate(data.mom0.comp[c]);
        const double rhs = off0[c] - offT[c];
        r.momentum_defect[c] = lhs - rhs;
        worst = std::max(worst, std::abs(r.momentum_defect[c]));
        scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
    }
    r.momentum_ok = worst <= momentum_tol * scale;
    r.pass = r.mass_ok && r.momentum_ok && r.positivity_ok;
    return r;
}

namespace {

// (h(rho) + rho h'(rho)) d_t rho integrated over the torus, per component:
// the exact time derivative of int rho h(rho).
std::vector<double> drift_rate(const ScalarField& rho, const ScalarField& drho,
                               const ModelFunctions& model) {
    const int d = rho.grid.dim;
    std::vector<double> out(d, 0.0);
    ScalarField tmp(rho.grid);
    for (int c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < rho.v.size(); ++i) {
            const double r = rho.v[i];
            tmp.v[i] = (model.h_value(c, r) + r * model.h_deriv(c, r)) * drho.v[i];
        }
        out[c] = integrate(tmp);
    }
    return out;
}

} // namespace

MeanDrift build_mean_drift(const DensityProfileBundle& profile, const ModelFunctions& model,
                           const std::vector<double>& V0, double endpoint_tol) {
    const int d = profile.grid.dim;
    if (static_cast<int>(V0.size()) != d)
        fail(ErrorCode::BadConfig, "mean drift seed has the wrong dimension");
    const int n_t = profile.time.n_t;
    const double vol = profile.grid.volume();
    const double dt = profile.time.dt();

    MeanDrift md;
    md.time = profile.time;
    md.dim = d;
    md.V.assign(n_t, std::vector<double>(d, 0.0));
    md.dV.assign(n_t, std::vector<double>(d, 0.0));

    std::vector<std::vector<double>> rate(n_t);
    for (int k = 0; k < n_t; ++k) {
        rate[k] = drift_rate(profile.rho[k], profile.drho[k], model);
        for (int c = 0; c < d; ++c) md.dV[k][c] = -rate[k][c] / vol;
    }

    /* Cumulative composite Simpson: even nodes close a full two-panel rule;
     * odd nodes take the interpolatory half-panel formula through the next
     * node, so every prefix integral is fourth-order accurate. */
    md.V[0] = V0;
    for (int k = 1; k < n_t; ++k) {
        for (int c = 0; c < d; ++c) {
            double inc;
            if (k % 2 == 0) {
                inc = dt / 3.0 * (md.dV[k - 2][c] + 4.0 * md.dV[k - 1][c] + md.dV[k][c]);
                md.V[k][c] = md.V[k - 2][c] + inc;
            } else {
                inc = dt / 12.0 *
                      (5.0 * md.dV[k - 1][c] + 8.0 * md.dV[k][c] - md.dV[k + 1][c]);
                md.V[k][c] = md.V[k - 1][c] + inc;
            }
        }
    }

    /* Endpoint identity: the accumulated drift must reproduce the exact
     * difference of int rho h(rho) between the endpoint densities. */
    const auto off0 = offset_momentum(profile.rho[0], model);
    const auto offT = offset_momentum(profile.rho[n_t - 1], model);
    double defect = 0.0;
    double scale = 1.0;
    for (int c = 0; c < d; ++c) {
        const double lhs = vol * md.V[n_t - 1][c];
        const double rhs = vol * V0[c] - offT[c] + off0[c];
        defect = std::max(defect, std::abs(lhs - rhs));
        scale = std::max(scale, std::abs(rhs));
    }
    md.endpoint_defect = defect;
    if (defect > endpoint_tol * scale) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "mean-drift endpoint identity misses by %.3e (tolerance %.3e); "
                      "refine the time grid or fix the data",
                      defect, endpoint_tol * scale);
        fail(ErrorCode::EndpointMismatch, msg);
    }
    return md;
}

std::vector<double> MeanDrift::at(double t) const {
    const int n_t = time.n_t;
    const double dt = time.dt();
    int k = static_cast<int>(std::floor(t / dt));
    k = std::clamp(k, 0, n_t - 2);
    const double s = (t - time.node(k)) / dt;
    /* Cubic Hermite between stored value/slope pairs. */
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    std::vector<double> out(dim);
    for (int c = 0; c < dim; ++c)
        out[c] = h00 * V[k][c] + dt * h10 * dV[k][c] + h01 * V[k + 1][c] +
                 dt * h11 * dV[k + 1][c];
    return out;
}

} // namespace awr
