#include "awr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

#include "awr/errors.hpp"
#include "awr/fft.hpp"
#include "awr/parallel.hpp"
#include "awr/spectral.hpp"

namespace awr {

namespace {

/* Four-point Gauss-Legendre rule mapped to [0,1]: exact for polynomials of
 * degree <= 7, which covers psi (degree 6) and psi' (degree 5) times an
 * affine-in-time coefficient on each node interval. */
constexpr double kGaussTheta[4] = {
    0.06943184420297371, 0.33000947820757187, 0.6699905217924281, 0.9305681557970262};
constexpr double kGaussWeight[4] = {
    0.1739274225687269, 0.3260725774312731, 0.3260725774312731, 0.1739274225687269};

/* Node weight vectors for the time quadratures
 *   integral psi'(t) f(t) dt   and   integral psi(t) f(t) dt
 * over the window [node a, node b], where f is the piecewise-linear
 * interpolant of node values and psi(t) = 64 (s(1-s))^3 with s the window-
 * normalized time. Because the per-interval rule is exact, the weights for
 * psi' sum to zero exactly over any interval union (psi vanishes at the
 * window ends), so constant-in-time data produces a zero derivative pairing
 * up to rounding. */
struct TimeWeights {
    std::vector<double> wd; // multiplies node values in the psi' pairing
    std::vector<double> wv; // multiplies node values in the psi pairing
};

TimeWeights window_weights(const TimeGrid& tg, int a, int b) {
    TimeWeights W;
    W.wd.assign(tg.n_t, 0.0);
    W.wv.assign(tg.n_t, 0.0);
    const double ta = tg.node(a), tb = tg.node(b);
    const double len = tb - ta;
    for (int k = a; k < b; ++k) {
        const double t0 = tg.node(k);
        const double dt = tg.node(k + 1) - t0;
        for (int q = 0; q < 4; ++q) {
            const double th = kGaussTheta[q];
            const double s = (t0 + th * dt - ta) / len;
            const double base = s * (1.0 - s);
            const double psi = 64.0 * base * base * base;
            const double dpsi = 192.0 * base * base * (1.0 - 2.0 * s) / len;
            const double w = kGaussWeight[q] * dt;
            W.wd[k] += w * dpsi * (1.0 - th);
            W.wd[k + 1] += w * dpsi * th;
            W.wv[k] += w * psi * (1.0 - th);
            W.wv[k + 1] += w * psi * th;
        }
    }
    return W;
}

/* Node-aligned test windows: the full span, the two halves, and a centered
 * window clipped a quarter in from each end (when wide enough to be
 * nondegenerate). Distinct windows catch residuals that cancel over the full
 * span. */
std::vector<std::pair<int, int>> test_windows(int n_t) {
    const int last = n_t - 1;
    std::vector<std::pair<int, int>> w;
    w.push_back({0, last});
    if (last >= 2) {
        const int h = last / 2;
        w.push_back({0, h});
        w.push_back({h, last});
    }
    const int q = std::max(1, last / 4);
    if (last - q > q) w.push_back({q, last - q});
    return w;
}

struct TestMode {
    std::size_t idx;  // flat index into the spectral coefficient array
    double kv[3];     // wavenumber vector, pi * m per axis
};

/* All modes with |m|_inf <= max_mode, identified by their coefficient slot.
 * Pairing a field f against the test function e^{-i pi m.x} integrates to
 * |T^d| c_m(f), so the weak residual reads coefficients directly. */
std::vector<TestMode> test_modes(const Grid& g, int max_mode) {
    if (max_mode < 0 || 2 * max_mode + 1 > g.n)
        fail(ErrorCode::BadConfig, "test mode band must satisfy 2K+1 <= n");
    std::vector<TestMode> modes;
    const double pi = std::numbers::pi;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const std::array<int, 3> idx = g.unravel(p);
        bool inside = true;
        TestMode tm{p, {0.0, 0.0, 0.0}};
        for (int ax = 0; ax < g.dim; ++ax) {
            const int m = signed_mode(idx[ax], g.n);
            if (std::abs(m) > max_mode) {
                inside = false;
                break;
            }
            tm.kv[ax] = pi * m;
        }
        if (inside) modes.push_back(tm);
    }
    return modes;
}

ScalarField pointwise_product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "pointwise_product");
    ScalarField out(a.grid);
    parallel_for(a.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) out.v[i] = a.v[i] * b.v[i];
    });
    return out;
}

void require_nodes(const TimeGrid& tg, std::size_t have, const char* what) {
    if (have != static_cast<std::size_t>(tg.n_t))
        fail(ErrorCode::BadConfig, std::string(what) + ": series length must match the time grid");
}

void require_positive(const ScalarField& rho, const char* where) {
    double lo = rho.v.empty() ? 0.0 : rho.v[0];
    for (double r : rho.v) lo = std::min(lo, r);
    if (!(lo > 0.0)) fail(ErrorCode::PositivityFailure, std::string(where) + ": density must be positive");
}

/* Shared accumulation over windows x modes (x directions). eval(mode, node)
 * returns the integrand coefficient pair: the value paired with psi' and the
 * value paired with psi. */
template <typename Eval>
void accumulate_residuals(const TimeGrid& tg, const Grid& g,
                          const std::vector<std::pair<int, int>>& windows,
                          const std::vector<TestMode>& modes, int directions, Eval&& eval,
                          WeakResidualReport& rep) {
    const double vol = g.volume();
    double mx = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (const auto& [a, b] : windows) {
        const TimeWeights W = window_weights(tg, a, b);
        for (const TestMode& tm : modes) {
            for (int c = 0; c < directions; ++c) {
                cdouble acc(0.0, 0.0);
                for (int k = a; k <= b; ++k) {
                    const auto [fd, fv] = eval(tm, k, c);
                    acc += W.wd[k] * fd + W.wv[k] * fv;
                }
                const double r = vol * std::abs(acc);
                mx = std::max(mx, r);
                sum2 += r * r;
                ++count;
            }
        }
    }
    rep.weak_max = mx;
    rep.weak_rms = count ? std::sqrt(sum2 / static_cast<double>(count)) : 0.0;
    rep.modes = static_cast<int>(modes.size());
    rep.windows = static_cast<int>(windows.size());
}

} // namespace

WeakResidualReport weak_residual_continuity(const TimeGrid& tg,
                                            const std::vector<ScalarField>& rho,
                                            const std::vector<VectorField>& mom, int max_mode,
                                            const std::vector<ScalarField>& drho) {
    require_nodes(tg, rho.size(), "weak_residual_continuity(rho)");
    require_nodes(tg, mom.size(), "weak_residual_continuity(mom)");
    if (!drho.empty()) require_nodes(tg, drho.size(), "weak_residual_continuity(drho)");
    const Grid& g = rho.front().grid;
    const int d = g.dim;
    std::vector<SpectralField> rh;
    std::vector<std::vector<SpectralField>> mh(d);
    rh.reserve(rho.size());
    for (int k = 0; k < tg.n_t; ++k) {
        require_same_grid(g, rho[k].grid, "weak_residual_continuity");
        require_same_grid(g, mom[k].grid, "weak_residual_continuity");
        rh.push_back(to_spectral(rho[k]));
        for (int c = 0; c < d; ++c) mh[c].push_back(to_spectral(mom[k][c]));
    }

    WeakResidualReport rep;
    const auto windows = test_windows(tg.n_t);
    const auto modes = test_modes(g, max_mode);
    accumulate_residuals(tg, g, windows, modes, 1,
                         [&](const TestMode& tm, int k, int) -> std::pair<cdouble, cdouble> {
                             cdouble div(0.0, 0.0);
                             for (int c = 0; c < d; ++c) div += tm.kv[c] * mh[c][k].c[tm.idx];
                             return {rh[k].c[tm.idx], cdouble(0.0, -1.0) * div};
                         },
                         rep);

    if (!drho.empty()) {
        double s = 0.0;
        for (int k = 0; k < tg.n_t; ++k) {
            require_same_grid(g, drho[k].grid, "weak_residual_continuity");
            s = std::max(s, linf_norm(drho[k] + divergence(mom[k])));
        }
        rep.strong = s;
    }
    return rep;
}

WeakResidualReport weak_residual_momentum(const TimeGrid& tg,
                                          const std::vector<VectorField>& wmom,
                                          const std::vector<VectorField>& u, int max_mode,
                                          const std::vector<VectorField>& dwmom) {
    require_nodes(tg, wmom.size(), "weak_residual_momentum(wmom)");
    require_nodes(tg, u.size(), "weak_residual_momentum(u)");
    if (!dwmom.empty()) require_nodes(tg, dwmom.size(), "weak_residual_momentum(rate)");
    const Grid& g = wmom.front().grid;
    const int d = g.dim;
    // wh[c][k]: tested component; fh[c][j][k]: flux w-momentum_c * u_j.
    std::vector<std::vector<SpectralField>> wh(d);
    std::vector<std::vector<std::vector<SpectralField>>> fh(d,
                                                            std::vector<std::vector<SpectralField>>(d));
    for (int k = 0; k < tg.n_t; ++k) {
        require_same_grid(g, wmom[k].grid, "weak_residual_momentum");
        require_same_grid(g, u[k].grid, "weak_residual_momentum");
        for (int c = 0; c < d; ++c) {
            wh[c].push_back(to_spectral(wmom[k][c]));
            for (int j = 0; j < d; ++j)
                fh[c][j].push_back(to_spectral(pointwise_product(wmom[k][c], u[k][j])));
        }
    }

    WeakResidualReport rep;
    const auto windows = test_windows(tg.n_t);
    const auto modes = test_modes(g, max_mode);
    accumulate_residuals(tg, g, windows, modes, d,
                         [&](const TestMode& tm, int k, int c) -> std::pair<cdouble, cdouble> {
                             cdouble div(0.0, 0.0);
                             for (int j = 0; j < d; ++j) div += tm.kv[j] * fh[c][j][k].c[tm.idx];
                             return {wh[c][k].c[tm.idx], cdouble(0.0, -1.0) * div};
                         },
                         rep);

    if (!dwmom.empty()) {
        double s = 0.0;
        for (int k = 0; k < tg.n_t; ++k) {
            VectorField resid = dwmom[k];
            for (int c = 0; c < d; ++c)
                for (int j = 0; j < d; ++j)
                    resid[c] = resid[c] + deriv(pointwise_product(u[k][j], wmom[k][c]), j);
            s = std::max(s, linf_norm(resid));
        }
        rep.strong = s;
    }
    return rep;
}

TransportResidualReport affine_transport_residual(const SubsolutionBundle& b, int max_mode) {
    if (b.v.empty()) fail(ErrorCode::BadConfig, "affine_transport_residual: bundle has no path");
    const TimeGrid& tg = b.profile.time;
    const Grid& g = b.v.front().grid;
    const int d = g.dim;

    TransportResidualReport rep;
    const double invT = 1.0 / tg.T;
    VectorField resid = div_tensor(b.F);
    for (int c = 0; c < d; ++c)
        resid[c] = resid[c] + invT * (b.v.back()[c] - b.v.front()[c]);
    rep.strong = linf_norm(resid);

    std::vector<std::vector<SpectralField>> vh(d);
    for (int k = 0; k < tg.n_t; ++k)
        for (int c = 0; c < d; ++c) vh[c].push_back(to_spectral(b.v[k][c]));
    std::vector<std::vector<SpectralField>> Fh(d, std::vector<SpectralField>(d));
    for (int c = 0; c < d; ++c)
        for (int j = 0; j < d; ++j) Fh[c][j] = to_spectral(b.F.component(c, j));

    const auto windows = test_windows(tg.n_t);
    const auto modes = test_modes(g, max_mode);
    const double vol = g.volume();
    double mx = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (const auto& [a, bb] : windows) {
        const TimeWeights W = window_weights(tg, a, bb);
        double psi_mass = 0.0; // integral of psi, exact for the constant flux
        for (int k = a; k <= bb; ++k) psi_mass += W.wv[k];
        for (const TestMode& tm : modes) {
            for (int c = 0; c < d; ++c) {
                cdouble acc(0.0, 0.0);
                for (int k = a; k <= bb; ++k) acc += W.wd[k] * vh[c][k].c[tm.idx];
                cdouble div(0.0, 0.0);
                for (int j = 0; j < d; ++j) div += tm.kv[j] * Fh[c][j].c[tm.idx];
                acc += psi_mass * cdouble(0.0, -1.0) * div;
                const double r = vol * std::abs(acc);
                mx = std::max(mx, r);
                sum2 += r * r;
                ++count;
            }
        }
    }
    rep.weak_max = mx;
    rep.weak_rms = count ? std::sqrt(sum2 / static_cast<double>(count)) : 0.0;
    return rep;
}

MatField traceless_dyad(const VectorField& m, const ScalarField& rho) {
    require_same_grid(m.grid, rho.grid, "traceless_dyad");
    require_positive(rho, "traceless_dyad");
    const int d = m.dim();
    MatField T(m.grid);
    parallel_for(rho.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const double inv = 1.0 / rho.v[i];
            double s2 = 0.0;
            for (int c = 0; c < d; ++c) s2 += m[c].v[i] * m[c].v[i];
            const double sub = s2 * inv / d;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    T.at(a, b).v[i] = m[a].v[i] * m[b].v[i] * inv - (a == b ? sub : 0.0);
        }
    });
    return T;
}

double max_trace_norm(const MatField& T) {
    const int d = T.grid.dim;
    double mx = 0.0;
    for (std::size_t i = 0; i < T.grid.size(); ++i) {
        double tr = 0.0;
        for (int a = 0; a < d; ++a) tr += T.at(a, a).v[i];
        mx = std::max(mx, std::abs(tr));
    }
    return mx;
}

double recombination_defect(const VectorField& m, const ScalarField& rho,
                            const ScalarField& dt_phi_P) {
    require_same_grid(m.grid, rho.grid, "recombination_defect");
    require_same_grid(m.grid, dt_phi_P.grid, "recombination_defect");
    require_positive(rho, "recombination_defect");
    const int d = m.dim();
    ScalarField f(rho.grid);
    parallel_for(rho.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            double s2 = 0.0;
            for (int c = 0; c < d; ++c) s2 += m[c].v[i] * m[c].v[i];
            f.v[i] = dt_phi_P.v[i] + s2 / (d * rho.v[i]);
        }
    });
    const double mu = mean(f);
    double mx = 0.0;
    for (double x : f.v) mx = std::max(mx, std::abs(x - mu));
    return mx;
}

ConservedReport conserved_quantities(const TimeGrid& tg, const std::vector<ScalarField>& rho,
                                     const std::vector<VectorField>& wmom) {
    require_nodes(tg, rho.size(), "conserved_quantities(rho)");
    require_nodes(tg, wmom.size(), "conserved_quantities(wmom)");
    const int d = rho.front().grid.dim;
    ConservedReport rep;
    for (int k = 0; k < tg.n_t; ++k) {
        require_same_grid(rho.front().grid, rho[k].grid, "conserved_quantities");
        require_same_grid(rho.front().grid, wmom[k].grid, "conserved_quantities");
        rep.time.push_back(tg.node(k));
        rep.mass.push_back(integrate(rho[k]));
        std::vector<double> mk(d);
        for (int c = 0; c < d; ++c) mk[c] = integrate(wmom[k][c]);
        rep.momentum.push_back(std::move(mk));
    }
    for (int k = 0; k < tg.n_t; ++k) {
        rep.mass_drift = std::max(rep.mass_drift, std::abs(rep.mass[k] - rep.mass[0]));
        for (int c = 0; c < d; ++c)
            rep.momentum_drift =
                std::max(rep.momentum_drift, std::abs(rep.momentum[k][c] - rep.momentum[0][c]));
    }
    return rep;
}

EnergyVerdict energy_monitor(const TimeGrid& tg, const std::vector<double>& totals, double tol) {
    require_nodes(tg, totals.size(), "energy_monitor");
    if (!(tol >= 0.0)) fail(ErrorCode::BadConfig, "energy_monitor: tolerance must be >= 0");
    EnergyVerdict v;
    v.total = totals;
    v.tol = tol;
    for (int k = 0; k < tg.n_t; ++k) v.time.push_back(tg.node(k));
    bool ok = true;
    v.max_uptick = -std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < tg.n_t; ++k) {
        const double up = totals[k + 1] - totals[k];
        if (up > v.max_uptick) {
            v.max_uptick = up;
            v.uptick_node = k;
        }
        if (up > tol) ok = false;
    }
    for (int k = 0; k < tg.n_t; ++k) {
        v.initial_excess = std::max(v.initial_excess, totals[k] - totals[0]);
        if (totals[k] - totals[0] > tol) ok = false;
    }
    v.pass = ok;
    return v;
}

EnergyVerdict energy_monitor(const TimeGrid& tg, const std::vector<ScalarField>& rho,
                             const std::vector<VectorField>& u, const ModelFunctions& model,
                             double tol) {
    require_nodes(tg, rho.size(), "energy_monitor(rho)");
    require_nodes(tg, u.size(), "energy_monitor(u)");
    std::vector<double> totals;
    totals.reserve(rho.size());
    for (int k = 0; k < tg.n_t; ++k) totals.push_back(energy_field(rho[k], u[k], model).total);
    return energy_monitor(tg, totals, tol);
}

std::vector<double> admissible_energy_envelope(const AdmissibleSchedule& s) {
    const double half_vol = 0.5 * s.constants.vol;
    const double dt = s.time.dt();
    std::vector<double> env(s.lambda.size());
    if (env.empty()) return env;
    env[0] = half_vol * s.lambda[0];
    /* Each increment equals dt times the step certificate, so the series is
     * non-increasing exactly when the certificate holds. */
    for (std::size_t k = 0; k + 1 < env.size(); ++k)
        env[k + 1] = env[k] + half_vol * (s.lambda[k + 1] - s.lambda[k]) +
                     dt * s.constants.bound(s.lambda[k + 1]);
    return env;
}

BundleSeries bundle_series(const SubsolutionBundle& b) {
    if (b.v.empty()) fail(ErrorCode::BadConfig, "bundle_series: bundle has no path");
    const TimeGrid& tg = b.profile.time;
    const Grid& g = b.profile.grid;
    const int d = g.dim;
    BundleSeries s;
    for (int k = 0; k < tg.n_t; ++k) {
        const ScalarField& r = b.profile.rho[k];
        require_positive(r, "bundle_series");
        const VectorField gphi = grad(b.profile.phi[k]);
        const VectorField off = b.model.offset(r);
        const std::vector<double>& Vk = b.drift.V[k];
        VectorField m(g), uk(g), wk(g), wm(g);
        for (int c = 0; c < d; ++c) {
            const double Vc = Vk[c];
            parallel_for(g.size(), [&](std::size_t i0, std::size_t i1) {
                for (std::size_t i = i0; i < i1; ++i) {
                    const double mi = b.v[k][c].v[i] + gphi[c].v[i] + Vc;
                    m[c].v[i] = mi;
                    const double ui = mi / r.v[i];
                    uk[c].v[i] = ui;
                    wk[c].v[i] = ui + off[c].v[i];
                    wm[c].v[i] = mi + r.v[i] * off[c].v[i];
                }
            });
        }
        s.mom.push_back(std::move(m));
        s.u.push_back(std::move(uk));
        s.w.push_back(std::move(wk));
        s.wmom.push_back(std::move(wm));
    }
    return s;
}

VerificationReport verify_bundle(const SubsolutionBundle& b, int max_mode,
                                 const VerifyTolerances& tol) {
    if (b.v.empty()) fail(ErrorCode::BadConfig, "verify_bundle: bundle has no path");
    const TimeGrid& tg = b.profile.time;
    const Grid& g = b.profile.grid;
    const int d = g.dim;
    const int K = max_mode < 0 ? g.n / 4 : max_mode;

    VerificationReport rep;
    rep.tol = tol;

    const BundleSeries series = bundle_series(b);
    std::vector<double> energy_totals;
    for (int k = 0; k < tg.n_t; ++k) {
        const ScalarField& r = b.profile.rho[k];
        const VectorField off = b.model.offset(r);
        for (int c = 0; c < d; ++c) {
            double dd = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i)
                dd = std::max(dd, std::abs(series.w[k][c].v[i] - series.u[k][c].v[i] -
                                           off[c].v[i]));
            rep.offset_defect = std::max(rep.offset_defect, dd);
        }
        rep.dyad_trace_max =
            std::max(rep.dyad_trace_max, max_trace_norm(traceless_dyad(series.mom[k], r)));
        energy_totals.push_back(energy_field(r, series.u[k], b.model).total);
    }

    rep.continuity = weak_residual_continuity(tg, b.profile.rho, series.mom, K, b.profile.drho);
    rep.transport = affine_transport_residual(b, K);
    rep.conserved = conserved_quantities(tg, b.profile.rho, series.wmom);
    rep.energy = energy_monitor(tg, energy_totals, tol.energy);

    rep.continuity_ok =
        rep.continuity.strong <= tol.strong && rep.continuity.weak_max <= tol.weak;
    rep.transport_ok = rep.transport.strong <= tol.strong && rep.transport.weak_max <= tol.weak;
    rep.trace_ok = rep.dyad_trace_max <= tol.trace && rep.offset_defect <= tol.trace;
    rep.conserved_ok = rep.conserved.mass_drift <= tol.conserved_mass &&
                       rep.conserved.momentum_drift <= tol.conserved_momentum;
    rep.energy_ok = !tol.require_energy_monotone || rep.energy.pass;
    rep.pass = rep.continuity_ok && rep.transport_ok && rep.trace_ok && rep.conserved_ok &&
               rep.energy_ok;
    return rep;
}

} // namespace awr
