#include "awr/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "awr/parallel.hpp"
#include "awr/spectral.hpp"

namespace awr {

/* Closed-form eigenvalue extraction. For d = 2 the largest eigenvalue of
 * [[a, b], [b, c]] is the midpoint plus the radius, (a+c)/2 + hypot((a-c)/2, b).
 * For d = 3, shift by the mean eigenvalue q = tr(A)/3 and scale by the
 * deviatoric norm p = sqrt(|A - qI|_F^2 / 6); the normalized matrix has
 * eigenvalues 2 cos(theta + 2 pi j / 3) where 3 theta = acos(det/(2 p^3)).
 * The largest one is j = 0. Although acos has unbounded slope at the clamp
 * boundary, the composition cos(acos(r)/3) stays Lipschitz in r, so the
 * formula is uniformly accurate, including near-degenerate spectra. */
double lambda_max(const double* A, int d) {
    if (d == 1) return A[0];
    if (d == 2) {
        const double mid = 0.5 * (A[0] + A[3]);
        return mid + std::hypot(0.5 * (A[0] - A[3]), A[1]);
    }
    if (d != 3) fail(ErrorCode::BadConfig, "lambda_max supports d in {1,2,3}");
    const double q = (A[0] + A[4] + A[8]) / 3.0;
    const double b00 = A[0] - q, b11 = A[4] - q, b22 = A[8] - q;
    const double b01 = A[1], b02 = A[2], b12 = A[5];
    const double p2 =
        b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * (b01 * b01 + b02 * b02 + b12 * b12);
    if (p2 <= 0.0) return q; // scalar matrix
    const double p = std::sqrt(p2 / 6.0);
    const double det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                       b02 * (b01 * b12 - b11 * b02);
    const double r = std::clamp(0.5 * det / (p * p * p), -1.0, 1.0);
    return q + 2.0 * p * std::cos(std::acos(r) / 3.0);
}

double check_pointwise_inequality(const double* w, const double* B, int d) {
    double trace = 0.0, scale = 0.0;
    for (int i = 0; i < d; ++i) {
        trace += B[i * d + i];
        for (int j = 0; j < d; ++j) scale = std::max(scale, std::abs(B[i * d + j]));
    }
    if (std::abs(trace) > 1e-12 * std::max(1.0, scale))
        fail(ErrorCode::NotTraceless, "kinetic bound expects a trace-free matrix");
    double A[9];
    double w2 = 0.0;
    for (int i = 0; i < d; ++i) {
        w2 += w[i] * w[i];
        for (int j = 0; j < d; ++j) A[i * d + j] = w[i] * w[j] - B[i * d + j];
    }
    return d * lambda_max(A, d) - 0.5 * w2;
}

namespace {

/* Per-node pointwise scans. The membership inequality splits into a part that
 * depends on the level Lambda only through subtraction:
 *   e - (d/2) lambda_max[K] = Lambda - [ (d/2) d_t(Phi + P) + (d/2) lambda_max[K] ],
 * so both the schedule (which maximizes the bracket) and the membership check
 * (which minimizes the difference) reuse the same two scratch fields. */
struct NodeScan {
    ScalarField half_d_lmax; // (d/2) lambda_max[K]
    ScalarField half_d_rate; // (d/2) d_t(Phi + P(rho))
};

// (d/2)(d_t phi + P'(rho) d_t rho), the level-independent part of e.
ScalarField time_rate_half_d(const SubsolutionBundle& b, int k) {
    const Grid& g = b.profile.grid;
    ScalarField out(g);
    const ScalarField Pp = b.model.compose_Pprime(b.profile.rho[k]);
    const ScalarField& drho = b.profile.drho[k];
    const ScalarField& dphi = b.profile.dphi[k];
    const double half_d = 0.5 * g.dim;
    parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) out[p] = half_d * (dphi[p] + Pp[p] * drho[p]);
    });
    return out;
}

NodeScan scan_node(const SubsolutionBundle& b, int k) {
    const Grid& g = b.profile.grid;
    const int d = g.dim;
    NodeScan out{ScalarField(g), time_rate_half_d(b, k)};

    VectorField m = b.v[k] + grad(b.profile.phi[k]);
    for (int c = 0; c < d; ++c) {
        const double Vc = b.drift.V[k][c];
        ScalarField& mc = m[c];
        parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t p = lo; p < hi; ++p) mc[p] += Vc;
        });
    }

    const ScalarField& rho = b.profile.rho[k];
    const SymTensorField0& F = b.F;
    const SymTensorField0& M = b.M[k];
    const SymTensorField0& N = b.N[k];
    parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
        double A[9], mm[3];
        for (std::size_t p = lo; p < hi; ++p) {
            for (int c = 0; c < d; ++c) mm[c] = m[c][p];
            const double inv_rho = 1.0 / rho[p];
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j) {
                    const double kij = mm[i] * mm[j] * inv_rho - F.entry(i, j, p) +
                                       M.entry(i, j, p) + N.entry(i, j, p);
                    A[i * d + j] = kij;
                    A[j * d + i] = kij;
                }
            out.half_d_lmax[p] = 0.5 * d * lambda_max(A, d);
        }
    });
    return out;
}

void require_clean_path_field(const VectorField& v, const char* label) {
    const double scale = std::max(1.0, linf_norm(v));
    if (linf_norm(divergence(v)) > 1e-12 * scale)
        fail(ErrorCode::NotSolenoidal, std::string(label) + " must be divergence-free");
    for (int c = 0; c < v.dim(); ++c)
        if (std::abs(mean(v[c])) > 1e-12 * scale)
            fail(ErrorCode::NonZeroMean, std::string(label) + " must have zero mean");
}

/* Monotonicity-limited slopes for cubic interpolation on a uniform grid
 * (Fritsch-Carlson). Start from secant averages, zero the slope at local
 * extrema, then pull (m_k, m_{k+1}) inside the circle of radius 3 secants
 * where the Hermite cubic is monotone on each interval. */
std::vector<double> limited_slopes(const std::vector<double>& y, double dt) {
    const int n = static_cast<int>(y.size());
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> sec(n - 1);
    for (int i = 0; i + 1 < n; ++i) sec[i] = (y[i + 1] - y[i]) / dt;
    m[0] = sec[0];
    m[n - 1] = sec[n - 2];
    for (int i = 1; i + 1 < n; ++i)
        m[i] = sec[i - 1] * sec[i] <= 0.0 ? 0.0 : 0.5 * (sec[i - 1] + sec[i]);
    for (int i = 0; i + 1 < n; ++i) {
        if (sec[i] == 0.0) {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        const double a = m[i] / sec[i], b = m[i + 1] / sec[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m[i] = tau * a * sec[i];
            m[i + 1] = tau * b * sec[i];
        }
    }
    return m;
}

} // namespace

double SubsolutionBundle::lambda_at(double t) const {
    if (lambda.empty()) fail(ErrorCode::BadConfig, "no energy level installed");
    const TimeGrid& tg = profile.time;
    const double dt = tg.dt();
    t = std::clamp(t, 0.0, tg.T);
    const int k = std::min(static_cast<int>(t / dt), tg.n_t - 2);
    const double s = std::clamp((t - tg.node(k)) / dt, 0.0, 1.0);
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * lambda[k] + h10 * dt * dlambda[k] + h01 * lambda[k + 1] +
           h11 * dt * dlambda[k + 1];
}

SubsolutionBundle assemble_subsolution(const DensityProfileBundle& profile,
                                       const MeanDrift& drift, const ModelFunctions& model,
                                       const VectorField& v0, const VectorField& vT) {
    const Grid& g = profile.grid;
    require_same_grid(g, v0.grid, "subsolution ingredients");
    require_same_grid(g, vT.grid, "subsolution ingredients");
    if (drift.time.n_t != profile.time.n_t || drift.dim != g.dim)
        fail(ErrorCode::BadConfig, "mean drift does not match the profile layout");
    if (model.dim != g.dim)
        fail(ErrorCode::BadConfig, "model dimension does not match the grid");
    require_clean_path_field(v0, "initial path field");
    require_clean_path_field(vT, "terminal path field");

    SubsolutionBundle b;
    b.profile = profile;
    b.drift = drift;
    b.model = model;

    const TimeGrid& tg = profile.time;
    b.v.reserve(tg.n_t);
    for (int k = 0; k < tg.n_t; ++k) {
        const double s = tg.node(k) / tg.T; // exactly 0 and 1 at the endpoints
        b.v.push_back((1.0 - s) * v0 + s * vT);
    }
    b.F = build_F(v0, vT, tg.T);
    b.M.reserve(tg.n_t);
    b.N.reserve(tg.n_t);
    for (int k = 0; k < tg.n_t; ++k) {
        b.M.push_back(build_M(profile, drift, model, k));
        b.N.push_back(build_N(b.v[k], profile.rho[k], model));
    }
    return b;
}

void install_lambda(SubsolutionBundle& b, const std::vector<double>& lambda,
                    const std::vector<double>& dlambda) {
    const int n_t = b.profile.time.n_t;
    if (static_cast<int>(lambda.size()) != n_t || static_cast<int>(dlambda.size()) != n_t)
        fail(ErrorCode::BadConfig, "energy level needs one value and one slope per node");
    b.lambda = lambda;
    b.dlambda = dlambda;
    b.e.clear();
    b.e.reserve(n_t);
    const Grid& g = b.profile.grid;
    for (int k = 0; k < n_t; ++k) {
        const ScalarField rate = time_rate_half_d(b, k);
        ScalarField ek(g);
        const double lam = lambda[k];
        parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t p = lo; p < hi; ++p) ek[p] = lam - rate[p];
        });
        b.e.push_back(std::move(ek));
    }
}

void schedule_lambda_margin(SubsolutionBundle& b, double eta) {
    if (eta <= 0.0) fail(ErrorCode::BadConfig, "schedule margin must be positive");
    if (b.v.empty()) fail(ErrorCode::BadConfig, "assemble the bundle before scheduling");
    b.eta = eta;
    const int n_t = b.profile.time.n_t;
    std::vector<double> lam(n_t);
    for (int k = 0; k < n_t; ++k) {
        const NodeScan s = scan_node(b, k);
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < s.half_d_lmax.size(); ++p)
            peak = std::max(peak, s.half_d_lmax[p] + s.half_d_rate[p]);
        lam[k] = peak + eta;
    }
    install_lambda(b, lam, limited_slopes(lam, b.profile.time.dt()));
}

MembershipReport check_membership(const SubsolutionBundle& b, double tau) {
    if (b.lambda.empty() || b.e.empty())
        fail(ErrorCode::BadConfig, "no energy level installed");
    const TimeGrid& tg = b.profile.time;
    if (tau < 0.0 || tau >= tg.T)
        fail(ErrorCode::BadConfig, "membership window start must lie in [0, T)");

    MembershipReport rep;
    rep.tau = tau;
    rep.margin = std::numeric_limits<double>::infinity();
    rep.min_e = std::numeric_limits<double>::infinity();
    for (int k = 0; k < tg.n_t; ++k) {
        const double t = tg.node(k);
        if (!(t > tau || tau == 0.0)) continue;
        const NodeScan s = scan_node(b, k);
        const ScalarField& ek = b.e[k];
        double node_min = std::numeric_limits<double>::infinity();
        double emin = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < ek.size(); ++p) {
            node_min = std::min(node_min, ek[p] - s.half_d_lmax[p]);
            emin = std::min(emin, ek[p]);
        }
        rep.node_time.push_back(t);
        rep.node_min.push_back(node_min);
        rep.margin = std::min(rep.margin, node_min);
        rep.min_e = std::min(rep.min_e, emin);
    }
    rep.pass = rep.margin > 0.0 && rep.min_e > 0.0;
    return rep;
}

double AdmissibleConstants::bound(double lambda) const {
    // Negative arguments are only reachable inside a depleting integration;
    // clamping keeps the intermediate stages finite until the throw.
    const double y = std::sqrt(2.0 * std::max(lambda, 0.0) / rho_min);
    return vol * rho_max * grad_h_inf * (y + offset_inf) * y;
}

AdmissibleSchedule schedule_lambda_admissible(const ScalarField& rho,
                                              const ModelFunctions& model, double lambda0,
                                              const TimeGrid& tg, int substeps) {
    if (lambda0 <= 0.0) fail(ErrorCode::BadConfig, "initial energy level must be positive");
    if (substeps < 1) fail(ErrorCode::BadConfig, "level ODE needs at least one substep");
    const Grid& g = rho.grid;
    if (model.dim != g.dim)
        fail(ErrorCode::BadConfig, "model dimension does not match the grid");

    AdmissibleConstants c;
    c.vol = g.volume();
    c.rho_min = std::numeric_limits<double>::infinity();
    c.rho_max = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < rho.size(); ++p) {
        c.rho_min = std::min(c.rho_min, rho[p]);
        c.rho_max = std::max(c.rho_max, rho[p]);
    }
    if (!(c.rho_min > 0.0))
        fail(ErrorCode::PositivityFailure, "static density must be strictly positive");
    model.check_domain(c.rho_min);
    model.check_domain(c.rho_max);

    // |grad h(rho)|_F = |h'(rho)|_2 |grad rho|_2 pointwise; take the sup.
    const VectorField grho = grad(rho);
    const int d = g.dim;
    for (std::size_t p = 0; p < rho.size(); ++p) {
        double dh2 = 0.0, gr2 = 0.0;
        for (int cmp = 0; cmp < d; ++cmp) {
            const double dh = model.h_deriv(cmp, rho[p]);
            dh2 += dh * dh;
            gr2 += grho[cmp][p] * grho[cmp][p];
        }
        c.grad_h_inf = std::max(c.grad_h_inf, std::sqrt(dh2 * gr2));
    }
    c.offset_inf = linf_norm(model.offset(rho));

    const auto slope = [&c](double lam) {
        const double bd = c.bound(lam);
        return bd == 0.0 ? 0.0 : -(2.0 / c.vol) * bd;
    };

    AdmissibleSchedule out;
    out.time = tg;
    out.constants = c;
    out.lambda.resize(tg.n_t);
    out.dlambda.resize(tg.n_t);
    double lam = lambda0;
    out.lambda[0] = lam;
    out.dlambda[0] = slope(lam);
    const double h = tg.dt() / substeps;
    for (int k = 0; k + 1 < tg.n_t; ++k) {
        for (int s = 0; s < substeps; ++s) {
            const double k1 = slope(lam);
            const double k2 = slope(lam + 0.5 * h * k1);
            const double k3 = slope(lam + 0.5 * h * k2);
            const double k4 = slope(lam + h * k3);
            lam += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!(lam > 0.0))
                fail(ErrorCode::LambdaDepleted,
                     "energy level exhausted before the final time; shorten the "
                     "interval or raise the initial level");
        }
        out.lambda[k + 1] = lam;
        out.dlambda[k + 1] = slope(lam);
    }

    double defect = -std::numeric_limits<double>::infinity();
    const double dt = tg.dt();
    for (int k = 0; k + 1 < tg.n_t; ++k)
        defect = std::max(defect, (c.vol / 2.0) * (out.lambda[k + 1] - out.lambda[k]) / dt +
                                      c.bound(out.lambda[k + 1]));
    out.certificate_defect = defect;
    return out;
}

EnergyField energy_field(const ScalarField& rho, const VectorField& u,
                         const ModelFunctions& model) {
    require_same_grid(rho.grid, u.grid, "energy ingredients");
    const VectorField off = model.offset(rho);
    const int d = rho.grid.dim;
    EnergyField out{ScalarField(rho.grid), 0.0};
    parallel_for(rho.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) {
                const double w = u[c][p] + off[c][p];
                s += w * w;
            }
            out.E[p] = 0.5 * rho[p] * s;
        }
    });
    out.total = integrate(out.E);
    return out;
}

} // namespace awr
