#include "awr/lame.hpp"

#include <algorithm>
#include <cmath>

#include "awr/errors.hpp"
#include "awr/fft.hpp"
#include "awr/parallel.hpp"
#include "awr/spectral.hpp"

namespace awr {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_zero_mean(const ScalarField& f, double tol, const char* what) {
    if (std::abs(mean(f)) > tol * std::max(rms(f), 1e-300))
        fail(ErrorCode::NonZeroMean, what);
}

} // namespace

VectorField lame_apply(const VectorField& U) {
    const double beta = 1.0 - 2.0 / U.grid.dim;
    VectorField out = laplacian(U);
    if (beta != 0.0) {
        VectorField gd = grad(divergence(U));
        for (int c = 0; c < U.grid.dim; ++c) axpy(beta, gd[c], out[c]);
    }
    return out;
}

SymTensorField0 deformation_tensor(const VectorField& U) {
    const Grid& g = U.grid;
    const int d = g.dim;
    MatField J = jacobian(U); // at(i,j) = d_i U_j
    ScalarField divU(g);
    for (int i = 0; i < d; ++i) axpy(1.0, J.at(i, i), divU);

    SymTensorField0 T(g);
    const double c = 2.0 / d;
    auto diag = [&](int i) {
        ScalarField out = J.at(i, i);
        for (std::size_t p = 0; p < out.size(); ++p)
            out[p] = 2.0 * out[p] - c * divU[p];
        return out;
    };
    auto off = [&](int i, int j) { return J.at(i, j) + J.at(j, i); };
    if (d == 2) {
        T.comp[0] = diag(0);
        T.comp[1] = off(0, 1);
    } else {
        T.comp[0] = diag(0);
        T.comp[1] = diag(1);
        T.comp[2] = off(0, 1);
        T.comp[3] = off(0, 2);
        T.comp[4] = off(1, 2);
    }
    return T;
}

LameSolution lame_solve(const VectorField& rhs, double tol_mean) {
    const Grid& g = rhs.grid;
    const int d = g.dim;
    const int n = g.n;
    const double beta = 1.0 - 2.0 / d;
    for (int c = 0; c < d; ++c)
        require_zero_mean(rhs.comp[c], tol_mean, "elliptic right-hand side has a mean");

    std::vector<SpectralField> spec;
    spec.reserve(d);
    for (int c = 0; c < d; ++c) spec.push_back(to_spectral(rhs.comp[c]));

    /* Invert the per-mode symbol. Odd derivatives zero the Nyquist index, so
     * the gradient part of the symbol uses the zeroed wavenumber k_z while
     * the Laplacian part keeps the full one; inverting exactly that pair
     * makes the forward residual vanish identically for every mode. */
    std::vector<cdouble*> hat(d);
    for (int c = 0; c < d; ++c) hat[c] = spec[c].c.data();
    parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            const auto idx = g.unravel(p);
            double kf[3] = {0.0, 0.0, 0.0}, kz[3] = {0.0, 0.0, 0.0};
            double kf2 = 0.0, kz2 = 0.0;
            for (int ax = 0; ax < d; ++ax) {
                const int m = signed_mode(idx[ax], n);
                kf[ax] = kPi * m;
                kz[ax] = is_nyquist(idx[ax], n) ? 0.0 : kf[ax];
                kf2 += kf[ax] * kf[ax];
                kz2 += kz[ax] * kz[ax];
            }
            if (kf2 == 0.0) {
                for (int c = 0; c < d; ++c) hat[c][p] = 0.0;
                continue;
            }
            cdouble a = 0.0;
            for (int c = 0; c < d; ++c) a += kz[c] * hat[c][p];
            const double denom = kf2 + beta * kz2;
            for (int c = 0; c < d; ++c)
                hat[c][p] = -(hat[c][p] - beta * a * kz[c] / denom) / kf2;
        }
    });

    LameSolution sol;
    sol.U = VectorField(g);
    for (int c = 0; c < d; ++c) sol.U.comp[c] = from_spectral(spec[c]);
    sol.tensor = deformation_tensor(sol.U);
    return sol;
}

namespace {

// d_t(rho h(rho)) = (h(rho) + rho h'(rho)) d_t rho, evaluated pointwise.
ScalarField offset_rate(const ScalarField& rho, const ScalarField& drho,
                        const ModelFunctions& model, int c) {
    ScalarField out(rho.grid);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = rho.v[i];
        out.v[i] = (model.h_value(c, r) + r * model.h_deriv(c, r)) * drho.v[i];
    }
    return out;
}

void require_assembled_mean_zero(const VectorField& rhs, const char* what) {
    double scale = std::max(1.0, linf_norm(rhs));
    for (int c = 0; c < rhs.grid.dim; ++c)
        if (std::abs(mean(rhs.comp[c])) > 1e-12 * scale) fail(ErrorCode::NonZeroMean, what);
}

} // namespace

SymTensorField0 build_M(const DensityProfileBundle& profile, const MeanDrift& drift,
                        const ModelFunctions& model, int node) {
    if (node < 0 || node >= profile.time.n_t)
        fail(ErrorCode::BadConfig, "time node out of range");
    const Grid& g = profile.grid;
    const int d = g.dim;
    const ScalarField& rho = profile.rho[node];

    VectorField transport = grad(profile.phi[node]);
    for (int c = 0; c < d; ++c)
        for (std::size_t i = 0; i < transport.comp[c].size(); ++i)
            transport.comp[c][i] += drift.V[node][c];

    VectorField offset = model.offset(rho);
    VectorField out = div_tensor(outer(transport, offset));
    for (int c = 0; c < d; ++c) {
        ScalarField rate = offset_rate(rho, profile.drho[node], model, c);
        const double avg = mean(rate);
        for (std::size_t i = 0; i < rate.size(); ++i) out.comp[c][i] += rate[i] - avg;
    }
    require_assembled_mean_zero(out, "profile flux source acquired a mean");
    return lame_solve(out).tensor;
}

SymTensorField0 build_N(const VectorField& v, const ScalarField& rho,
                        const ModelFunctions& model, double tol_div) {
    require_same_grid(v.grid, rho.grid, "flux correction inputs");
    const int d = v.grid.dim;
    const double scale = std::max(1.0, linf_norm(v));
    if (linf_norm(divergence(v)) > tol_div * scale)
        fail(ErrorCode::NotSolenoidal, "advecting field must be divergence-free");
    for (int c = 0; c < d; ++c)
        if (std::abs(mean(v.comp[c])) > tol_div * scale)
            fail(ErrorCode::NonZeroMean, "advecting field must have zero mean");

    MatField J = jacobian(model.offset(rho)); // at(i,j) = d_i offset_j
    VectorField out(v.grid);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) axpy(1.0, multiply(v.comp[i], J.at(i, j)), out.comp[j]);
    }
    require_assembled_mean_zero(out, "advective flux source acquired a mean");
    return lame_solve(out).tensor;
}

SymTensorField0 build_F(const VectorField& v0, const VectorField& vT, double T) {
    require_same_grid(v0.grid, vT.grid, "affine path endpoints");
    if (!(T > 0.0)) fail(ErrorCode::BadConfig, "time horizon must be positive");
    VectorField rhs = (-1.0 / T) * (vT - v0);
    return lame_solve(rhs).tensor;
}

WeakContinuityRecord weak_continuity_probe(const std::vector<VectorField>& v_seq,
                                           const VectorField& v_limit,
                                           const ScalarField& rho,
                                           const ModelFunctions& model) {
    WeakContinuityRecord rec;
    SymTensorField0 base = build_N(v_limit, rho, model);
    for (const auto& v : v_seq)
        rec.distances.push_back(linf_norm(build_N(v, rho, model) - base));
    rec.decreasing = true;
    for (std::size_t i = 1; i < rec.distances.size(); ++i) {
        const bool zero_tie = rec.distances[i] == 0.0 && rec.distances[i - 1] == 0.0;
        if (!(rec.distances[i] < rec.distances[i - 1] || zero_tie)) rec.decreasing = false;
    }
    return rec;
}

} // namespace awr
