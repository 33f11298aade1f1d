#include "awr/spectral.hpp"

#include <cmath>
#include <numbers>

#include "awr/parallel.hpp"

namespace awr {

namespace {

constexpr double kPi = std::numbers::pi;

// Applies op(coeff, m[], nyq[]) to every spectral coefficient, where m holds
// the signed integer mode per axis and nyq flags the Nyquist index.
template <class Op>
void for_each_mode(SpectralField& s, Op op) {
    const Grid& g = s.grid;
    const int n = g.n;
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i) {
        auto idx = g.unravel(i);
        int m[3] = {0, 0, 0};
        bool nyq[3] = {false, false, false};
        for (int a = 0; a < g.dim; ++a) {
            m[a] = signed_mode(idx[a], n);
            nyq[a] = is_nyquist(idx[a], n);
        }
        op(s.c[i], m, nyq);
    }
}

ScalarField map_spectral(const ScalarField& f,
                         const std::function<void(cdouble&, const int*, const bool*)>& op) {
    SpectralField s = to_spectral(f);
    for_each_mode(s, [&](cdouble& c, const int* m, const bool* ny) { op(c, m, ny); });
    return from_spectral(s);
}

int dealias_cutoff(int n) { return n / 3; }

} // namespace

ScalarField deriv(const ScalarField& f, int axis) {
    return map_spectral(f, [axis](cdouble& c, const int* m, const bool* ny) {
        if (ny[axis]) {
            c = 0.0; // odd-order derivative: drop the Nyquist mode
            return;
        }
        c *= cdouble(0.0, kPi * m[axis]);
    });
}

VectorField grad(const ScalarField& f) {
    VectorField out(f.grid);
    for (int a = 0; a < f.grid.dim; ++a) out[a] = deriv(f, a);
    return out;
}

ScalarField divergence(const VectorField& u) {
    ScalarField out(u.grid);
    for (int a = 0; a < u.grid.dim; ++a) out = out + deriv(u[a], a);
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    return map_spectral(f, [&](cdouble& c, const int* m, const bool*) {
        double k2 = 0.0;
        for (int a = 0; a < f.grid.dim; ++a) k2 += kPi * m[a] * kPi * m[a];
        c *= -k2;
    });
}

VectorField laplacian(const VectorField& u) {
    VectorField out(u.grid);
    for (int a = 0; a < u.grid.dim; ++a) out[a] = laplacian(u[a]);
    return out;
}

MatField jacobian(const VectorField& u) {
    MatField J(u.grid);
    for (int i = 0; i < u.grid.dim; ++i)
        for (int j = 0; j < u.grid.dim; ++j) J.at(i, j) = deriv(u[j], i);
    return J;
}

VectorField div_tensor(const MatField& T) {
    VectorField out(T.grid);
    for (int j = 0; j < T.grid.dim; ++j) {
        ScalarField s(T.grid);
        for (int i = 0; i < T.grid.dim; ++i) s = s + deriv(T.at(i, j), i);
        out[j] = s;
    }
    return out;
}

VectorField div_tensor(const SymTensorField0& T) {
    VectorField out(T.grid);
    for (int j = 0; j < T.grid.dim; ++j) {
        ScalarField s(T.grid);
        for (int i = 0; i < T.grid.dim; ++i) s = s + deriv(T.component(i, j), i);
        out[j] = s;
    }
    return out;
}

ScalarField dealias(const ScalarField& f) {
    const int cut = dealias_cutoff(f.grid.n);
    return map_spectral(f, [&](cdouble& c, const int* m, const bool*) {
        for (int a = 0; a < f.grid.dim; ++a)
            if (std::abs(m[a]) > cut) {
                c = 0.0;
                return;
            }
    });
}

VectorField dealias(const VectorField& u) {
    VectorField out(u.grid);
    for (int a = 0; a < u.grid.dim; ++a) out[a] = dealias(u[a]);
    return out;
}

MatField dealias(const MatField& T) {
    MatField out(T.grid);
    for (std::size_t c = 0; c < T.comp.size(); ++c) out.comp[c] = dealias(T.comp[c]);
    return out;
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "multiply");
    ScalarField out(a.grid);
    const std::size_t N = a.size();
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = a[i] * b[i];
    });
    return dealias(out);
}

VectorField multiply(const ScalarField& a, const VectorField& b) {
    VectorField out(b.grid);
    for (int c = 0; c < b.grid.dim; ++c) out[c] = multiply(a, b[c]);
    return out;
}

MatField outer(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "outer");
    MatField T(a.grid);
    for (int i = 0; i < a.grid.dim; ++i)
        for (int j = 0; j < a.grid.dim; ++j) T.at(i, j) = multiply(a[i], b[j]);
    return T;
}

double integrate(const ScalarField& f) {
    return f.grid.cell_volume() * pairwise_sum(f.v.data(), f.v.size());
}

double mean(const ScalarField& f) { return integrate(f) / f.grid.volume(); }

double l2_norm(const ScalarField& f) {
    std::vector<double> sq(f.size());
    const std::size_t N = f.size();
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) sq[i] = f[i] * f[i];
    });
    return std::sqrt(f.grid.cell_volume() * pairwise_sum(sq.data(), sq.size()));
}

double rms(const ScalarField& f) { return l2_norm(f) / std::sqrt(f.grid.volume()); }

double linf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double l2_norm(const VectorField& u) {
    double s = 0.0;
    for (int a = 0; a < u.grid.dim; ++a) {
        const double c = l2_norm(u[a]);
        s += c * c;
    }
    return std::sqrt(s);
}

double linf_norm(const VectorField& u) {
    const std::size_t N = u.grid.size();
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (int a = 0; a < u.grid.dim; ++a) s += u[a][i] * u[a][i];
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

double linf_norm(const SymTensorField0& T) {
    const int d = T.grid.dim;
    const std::size_t N = T.grid.size();
    double m = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double e = T.entry(i, j, p);
                s += e * e;
            }
        m = std::max(m, s);
    }
    return std::sqrt(m); // max Frobenius norm over points
}

double spectral_l2_norm(const ScalarField& f) {
    SpectralField s = to_spectral(f);
    std::vector<double> sq(s.c.size());
    for (std::size_t i = 0; i < s.c.size(); ++i) sq[i] = std::norm(s.c[i]);
    return std::sqrt(f.grid.volume() * pairwise_sum(sq.data(), sq.size()));
}

ScalarField poisson_solve(const ScalarField& g, double tol_mean) {
    SpectralField s = to_spectral(g);
    const double scale = rms(g);
    const double m0 = std::abs(s.c[0]);
    if (m0 > tol_mean * std::max(scale, 1e-300))
        fail(ErrorCode::NonZeroMean, "Poisson right-hand side has nonzero mean");
    for_each_mode(s, [&](cdouble& c, const int* m, const bool*) {
        double k2 = 0.0;
        for (int a = 0; a < g.grid.dim; ++a) k2 += kPi * m[a] * kPi * m[a];
        c = k2 == 0.0 ? cdouble(0.0, 0.0) : c / (-k2);
    });
    return from_spectral(s);
}

HelmholtzParts helmholtz(const VectorField& mfield) {
    const Grid& g = mfield.grid;
    const int d = g.dim;
    std::vector<SpectralField> mu(d, SpectralField(g));
    for (int a = 0; a < d; ++a) mu[a] = to_spectral(mfield[a]);

    HelmholtzParts parts;
    parts.V.resize(d);
    for (int a = 0; a < d; ++a) parts.V[a] = mu[a].c[0].real();

    SpectralField phi(g);
    std::vector<SpectralField> vs(d, SpectralField(g));
    const int n = g.n;
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i) {
        auto idx = g.unravel(i);
        double k[3] = {0, 0, 0};
        double k2 = 0.0;
        bool anyny = false, zero = true;
        for (int a = 0; a < d; ++a) {
            const int m = signed_mode(idx[a], n);
            k[a] = kPi * m;
            k2 += k[a] * k[a];
            anyny = anyny || is_nyquist(idx[a], n);
            zero = zero && m == 0;
        }
        if (zero) {
            phi.c[i] = 0.0;
            for (int a = 0; a < d; ++a) vs[a].c[i] = 0.0; // constant part lives in V
            continue;
        }
        if (anyny) {
            phi.c[i] = 0.0; // gradients cannot carry Nyquist content
            for (int a = 0; a < d; ++a) vs[a].c[i] = mu[a].c[i];
            continue;
        }
        cdouble dot(0.0, 0.0);
        for (int a = 0; a < d; ++a) dot += k[a] * mu[a].c[i];
        const cdouble ph = cdouble(0.0, -1.0) * dot / k2; // grad phi = i k ph
        phi.c[i] = ph;
        for (int a = 0; a < d; ++a) vs[a].c[i] = mu[a].c[i] - cdouble(0.0, k[a]) * ph;
    }
    parts.phi = from_spectral(phi);
    parts.v = VectorField(g);
    for (int a = 0; a < d; ++a) parts.v[a] = from_spectral(vs[a]);
    return parts;
}

VectorField recompose(const HelmholtzParts& parts) {
    VectorField out = parts.v + grad(parts.phi);
    const std::size_t N = out.grid.size();
    for (int a = 0; a < out.grid.dim; ++a)
        for (std::size_t i = 0; i < N; ++i) out[a][i] += parts.V[a];
    return out;
}

ScalarField make_field(const Grid& g, const std::function<double(const double*)>& f) {
    ScalarField out(g);
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i) {
        auto idx = g.unravel(i);
        double x[3] = {0, 0, 0};
        for (int a = 0; a < g.dim; ++a) x[a] = g.coord(idx[a]);
        out[i] = f(x);
    }
    return out;
}

VectorField make_vector_field(const Grid& g, int comp_count,
                              const std::function<void(const double*, double*)>& f) {
    if (comp_count != g.dim) fail(ErrorCode::BadConfig, "component count must equal dimension");
    VectorField out(g);
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i) {
        auto idx = g.unravel(i);
        double x[3] = {0, 0, 0};
        double u[3] = {0, 0, 0};
        for (int a = 0; a < g.dim; ++a) x[a] = g.coord(idx[a]);
        f(x, u);
        for (int a = 0; a < g.dim; ++a) out[a][i] = u[a];
    }
    return out;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "operator+");
    ScalarField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "operator-");
    ScalarField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

ScalarField operator*(double s, const ScalarField& a) {
    ScalarField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
    VectorField out(a.grid);
    for (int c = 0; c < a.grid.dim; ++c) out[c] = a[c] + b[c];
    return out;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
    VectorField out(a.grid);
    for (int c = 0; c < a.grid.dim; ++c) out[c] = a[c] - b[c];
    return out;
}

VectorField operator*(double s, const VectorField& a) {
    VectorField out(a.grid);
    for (int c = 0; c < a.grid.dim; ++c) out[c] = s * a[c];
    return out;
}

SymTensorField0 operator+(const SymTensorField0& a, const SymTensorField0& b) {
    SymTensorField0 out(a.grid);
    for (std::size_t c = 0; c < a.comp.size(); ++c) out.comp[c] = a.comp[c] + b.comp[c];
    return out;
}

SymTensorField0 operator-(const SymTensorField0& a, const SymTensorField0& b) {
    SymTensorField0 out(a.grid);
    for (std::size_t c = 0; c < a.comp.size(); ++c) out.comp[c] = a.comp[c] - b.comp[c];
    return out;
}

SymTensorField0 operator*(double s, const SymTensorField0& a) {
    SymTensorField0 out(a.grid);
    for (std::size_t c = 0; c < a.comp.size(); ++c) out.comp[c] = s * a.comp[c];
    return out;
}

void axpy(double a, const ScalarField& x, ScalarField& y) {
    require_same_grid(x.grid, y.grid, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

} // namespace awr
