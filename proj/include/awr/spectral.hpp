#pragma once

#include <functional>

#include "awr/fft.hpp"
#include "awr/grid.hpp"

namespace awr {

// Pseudo-spectral calculus on the periodic grid. Derivatives act as diagonal
// multipliers in mode space (k = pi*m per axis). Odd-order derivatives zero
// the Nyquist mode (the usual real-transform convention); the Laplacian and
// its inverse keep it, since their symbol is real.

ScalarField deriv(const ScalarField& f, int axis);      // d/dx_axis
VectorField grad(const ScalarField& f);
ScalarField divergence(const VectorField& u);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& u);
MatField jacobian(const VectorField& u);                // at(i,j) = d_i u_j
VectorField div_tensor(const MatField& T);              // (div T)_j = sum_i d_i T_ij
VectorField div_tensor(const SymTensorField0& T);

// Truncates every mode with |m| > n/3 on any axis (2/3 rule).
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& u);
MatField dealias(const MatField& T);

// Pointwise products, truncated by the 2/3 rule so the follow-up spectral
// derivatives act on an alias-clean band.
ScalarField multiply(const ScalarField& a, const ScalarField& b);
VectorField multiply(const ScalarField& a, const VectorField& b);
MatField outer(const VectorField& a, const VectorField& b); // at(i,j) = a_i b_j

// Grid quadrature: sum * (2/n)^d, with a fixed-shape pairwise reduction.
double integrate(const ScalarField& f);
double mean(const ScalarField& f);
double l2_norm(const ScalarField& f);   // sqrt(integrate(f^2))
double rms(const ScalarField& f);       // l2 / sqrt(|T^d|)
double linf_norm(const ScalarField& f);
double l2_norm(const VectorField& u);
double linf_norm(const VectorField& u); // max over points of |u(x)|_2
double linf_norm(const SymTensorField0& T);

// Spectral L2 norm via Parseval: |T^d| * sum |c_m|^2 == integrate(f^2).
double spectral_l2_norm(const ScalarField& f);

// Solves lap(phi) = g with mean(phi) = 0. Requires |mean(g)| <= tol*rms(g).
ScalarField poisson_solve(const ScalarField& g, double tol_mean = 1e-12);

// m = v + V + grad(phi) with div v = 0, mean v = 0, V constant, mean phi = 0.
// Nyquist content (never populated by 2/3-band data) is assigned to v.
struct HelmholtzParts {
    VectorField v;
    std::vector<double> V;
    ScalarField phi;
};
HelmholtzParts helmholtz(const VectorField& m);
VectorField recompose(const HelmholtzParts& parts);

// Field construction helpers.
ScalarField make_field(const Grid& g, const std::function<double(const double*)>& f);
VectorField make_vector_field(const Grid& g, int comp_count_must_equal_dim,
                              const std::function<void(const double*, double*)>& f);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
SymTensorField0 operator+(const SymTensorField0& a, const SymTensorField0& b);
SymTensorField0 operator-(const SymTensorField0& a, const SymTensorField0& b);
SymTensorField0 operator*(double s, const SymTensorField0& a);

void axpy(double a, const ScalarField& x, ScalarField& y); // y += a*x

} // namespace awr
