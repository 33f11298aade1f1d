#include "awr/profile.hpp"

#include <algorithm>
#include <cmath>

#include "awr/errors.hpp"
#include "awr/spectral.hpp"

namespace awr {

namespace {

/* The ramp is the quintic smoothstep S(s) = 6s^5 - 15s^4 + 10s^3 composed
 * with s = t/T, used as H = 1 - S. It is monotone with vanishing first and
 * second derivatives at both endpoints, so endpoint fields and endpoint
 * time derivatives of the profile decouple from the ramp. */
double smoothstep(double s) { return ((6.0 * s - 15.0) * s + 10.0) * s * s * s; }
double smoothstep_d1(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }
double smoothstep_d2(double s) { return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }

/* Bump kernel on [0, 1]: b(s) = s(1-s)^3. It vanishes to second order at
 * s = 1 (C^2 continuation by zero), has b'(0) = 1, and peaks at s = 1/4
 * with value 27/256. The bumps below rescale it so the slope at the pinned
 * endpoint is exactly -1 while the amplitude stays below any requested cap. */
double bump(double s) { return s * (1.0 - s) * (1.0 - s) * (1.0 - s); }
double bump_d1(double s) { return (1.0 - s) * (1.0 - s) * (1.0 - 4.0 * s); }
double bump_d2(double s) { return (1.0 - s) * (12.0 * s - 6.0); }

constexpr double kBumpPeak = 27.0 / 256.0;

} // namespace

TimeShapes make_time_shapes(double T, double delta, double s0, double sT) {
    if (!(T > 0.0)) fail(ErrorCode::BadConfig, "time horizon must be positive");
    if (!(delta > 0.0)) fail(ErrorCode::BadConfig, "bump amplitude cap must be positive");
    if (!(0.0 < s0 && s0 < sT && sT < T))
        fail(ErrorCode::BadWindow, "bump windows must satisfy 0 < s0 < sT < T");

    TimeShapes ts;
    ts.T = T;
    ts.delta = delta;
    ts.s0 = s0;
    ts.sT = sT;

    ts.H.value = [T](double t) { return 1.0 - smoothstep(t / T); };
    ts.H.d1 = [T](double t) { return -smoothstep_d1(t / T) / T; };
    ts.H.d2 = [T](double t) { return -smoothstep_d2(t / T) / (T * T); };

    /* Width min(window, 9*delta) keeps the peak w * 27/256 <= (243/256) delta
     * strictly below the cap while the unit slope at the pinned end is kept
     * by construction (the kernel argument is t/w, the prefactor is w). */
    const double w0 = std::min(s0, 9.0 * delta);
    ts.max_Z0 = kBumpPeak * w0;
    ts.Z0.value = [w0](double t) {
        return (t >= 0.0 && t <= w0) ? -w0 * bump(t / w0) : 0.0;
    };
    ts.Z0.d1 = [w0](double t) {
        return (t >= 0.0 && t <= w0) ? -bump_d1(t / w0) : 0.0;
    };
    ts.Z0.d2 = [w0](double t) {
        return (t >= 0.0 && t <= w0) ? -bump_d2(t / w0) / w0 : 0.0;
    };

    const double wT = std::min(T - sT, 9.0 * delta);
    ts.max_ZT = kBumpPeak * wT;
    ts.ZT.value = [T, wT](double t) {
        return (t >= T - wT && t <= T) ? wT * bump((T - t) / wT) : 0.0;
    };
    ts.ZT.d1 = [T, wT](double t) {
        return (t >= T - wT && t <= T) ? -bump_d1((T - t) / wT) : 0.0;
    };
    ts.ZT.d2 = [T, wT](double t) {
        return (t >= T - wT && t <= T) ? bump_d2((T - t) / wT) / wT : 0.0;
    };
    return ts;
}

TimeGrid::TimeGrid(double T_, int n_t_) : T(T_), n_t(n_t_) {
    if (!(T > 0.0)) fail(ErrorCode::BadConfig, "time horizon must be positive");
    if (n_t < 3 || n_t % 2 == 0)
        fail(ErrorCode::BadConfig, "time grid needs an odd node count >= 3");
}

namespace {

/* rho(t) and its time derivatives as combinations of the four ingredient
 * fields with shape-dependent scalar weights. Evaluating the weights once
 * per call keeps the per-node loop a plain axpy chain. */
ScalarField combine(const DensityProfileBundle& b, double a0, double aT, double c0,
                    double cT) {
    ScalarField out(b.grid);
    axpy(a0, b.rho0, out);
    axpy(aT, b.rhoT, out);
    axpy(c0, b.lap_phi0, out);
    axpy(cT, b.lap_phiT, out);
    return out;
}

} // namespace

ScalarField DensityProfileBundle::rho_at(double t) const {
    const double H = shapes.H.value(t);
    return combine(*this, H, 1.0 - H, shapes.Z0.value(t), shapes.ZT.value(t));
}

ScalarField DensityProfileBundle::drho_at(double t) const {
    const double dH = shapes.H.d1(t);
    return combine(*this, dH, -dH, shapes.Z0.d1(t), shapes.ZT.d1(t));
}

ScalarField DensityProfileBundle::ddrho_at(double t) const {
    const double ddH = shapes.H.d2(t);
    return combine(*this, ddH, -ddH, shapes.Z0.d2(t), shapes.ZT.d2(t));
}

DensityProfileBundle build_profile(const ScalarField& rho0, const ScalarField& rhoT,
                                   const ScalarField& phi0, const ScalarField& phiT,
                                   const TimeGrid& tg, const ShapeParams& sp,
                                   double theta) {
    require_same_grid(rho0.grid, rhoT.grid, "profile ingredients");
    require_same_grid(rho0.grid, phi0.grid, "profile ingredients");
    require_same_grid(rho0.grid, phiT.grid, "profile ingredients");
    if (!(theta > 0.0 && theta < 1.0))
        fail(ErrorCode::BadConfig, "positivity margin must lie in (0, 1)");

    const double inf0 = *std::min_element(rho0.v.begin(), rho0.v.end());
    const double infT = *std::min_element(rhoT.v.begin(), rhoT.v.end());
    const double floor = std::min(inf0, infT);
    if (!(floor > 0.0))
        fail(ErrorCode::PositivityFailure, "endpoint densities need a positive infimum");

    const double mass0 = integrate(rho0);
    const double massT = integrate(rhoT);
    if (std::abs(mass0 - massT) > 1e-10 * std::abs(mass0))
        fail(ErrorCode::IncompatibleMass, "endpoint densities carry different mass");

    DensityProfileBundle b;
    b.grid = rho0.grid;
    b.time = tg;
    b.theta = theta;
    b.mass = mass0;
    b.rho0 = rho0;
    b.rhoT = rhoT;
    b.lap_phi0 = laplacian(phi0);
    b.lap_phiT = laplacian(phiT);

    const double s0 = sp.s0 > 0.0 ? sp.s0 : tg.T / 4.0;
    const double sT = sp.sT > 0.0 ? sp.sT : 3.0 * tg.T / 4.0;
    const double amp = std::max(linf_norm(b.lap_phi0), linf_norm(b.lap_phiT));

    /* Amplitude search: the interpolation part of the profile never drops
     * below the endpoint infimum, so the only excursion is the bump term,
     * bounded by max|Z| * max|lap phi| (the supports are disjoint). Halve
     * the cap until that bound fits inside theta * floor. */
    double delta = sp.delta0 > 0.0 ? sp.delta0 : 0.1 * floor / (1.0 + amp);
    bool accepted = false;
    for (int pass = 0; pass < 60; ++pass) {
        b.shapes = make_time_shapes(tg.T, delta, s0, sT);
        const double excursion =
            std::max(b.shapes.max_Z0 * linf_norm(b.lap_phi0),
                     b.shapes.max_ZT * linf_norm(b.lap_phiT));
        if (excursion <= theta * floor) {
            accepted = true;
            break;
        }
        delta *= 0.5;
    }
    if (!accepted)
        fail(ErrorCode::PositivityFailure, "no bump amplitude keeps the density positive");
    b.delta = delta;

    b.rho.reserve(tg.n_t);
    b.drho.reserve(tg.n_t);
    b.ddrho.reserve(tg.n_t);
    b.phi.reserve(tg.n_t);
    b.dphi.reserve(tg.n_t);
    b.rho_min = floor;
    for (int k = 0; k < tg.n_t; ++k) {
        const double t = tg.node(k);
        b.rho.push_back(b.rho_at(t));
        b.drho.push_back(b.drho_at(t));
        b.ddrho.push_back(b.ddrho_at(t));
        /* The mean of d_t rho is H'(t) * (mass0 - massT) / |T^d| plus exact
         * zeros from the Laplacian terms; the mass precondition makes it
         * vanish to 1e-10, so the Poisson solves get a matching mean slack. */
        b.phi.push_back(poisson_solve(-1.0 * b.drho.back(), 1e-8));
        b.dphi.push_back(poisson_solve(-1.0 * b.ddrho.back(), 1e-8));

        const double lo = *std::min_element(b.rho.back().v.begin(), b.rho.back().v.end());
        b.rho_min = std::min(b.rho_min, lo);
        if (!(lo > 0.0))
            fail(ErrorCode::PositivityFailure, "density lost positivity at a node");
        if (std::abs(integrate(b.rho.back()) - mass0) > 1e-10 * std::abs(mass0))
            fail(ErrorCode::IncompatibleMass, "mass drifted along the profile");
    }
    return b;
}

} // namespace awr
