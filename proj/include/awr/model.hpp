#pragma once

#include <functional>
#include <string>
#include <vector>

#include "awr/grid.hpp"
#include "awr/spectral.hpp"

namespace awr {

// Velocity-offset specification: the vector function h(rho) added to the
// velocity in the second-order model. Built-ins: zero, a constant vector, or
// the linear family h(rho) = c * rho.
struct HSpec {
    enum class Kind { Zero, Constant, Linear } kind = Kind::Zero;
    std::vector<double> c; // dim entries for Constant/Linear

    double value(int comp, double rho) const;
    double deriv(int comp, double rho) const;
};

// Pressure/cost law with the derived potentials used by the construction:
//   P' (rho) = rho p'(rho)   (potential of the velocity transform)
//   Q' (rho) = rho p'(rho)   (potential of the viscous reformulation)
// The two are the same function; both callbacks are stored so their pointwise
// agreement can be asserted.
struct ModelFunctions {
    int dim = 2;
    double lo = 0.0;   // admissible density interval (lo, hi)
    double hi = 0.0;   // hi <= 0 means unbounded above
    std::string family;

    std::function<double(double)> p, dp, ddp;
    std::function<double(double)> P;        // antiderivative of rho p'
    std::function<double(double)> Pprime;   // rho p'
    std::function<double(double)> Qprime;   // rho p' (independent closure)
    HSpec h;
    // Tabulated offset overrides (set by the custom-table family only).
    std::function<double(int, double)> table_h, table_dh;

    void check_domain(double rho) const;
    double h_value(int comp, double rho) const {
        return table_h ? table_h(comp, rho) : h.value(comp, rho);
    }
    double h_deriv(int comp, double rho) const {
        return table_dh ? table_dh(comp, rho) : h.deriv(comp, rho);
    }

    // Pointwise compositions over a field (domain-checked).
    ScalarField compose_p(const ScalarField& rho) const;
    ScalarField compose_Pprime(const ScalarField& rho) const;
    VectorField compose_h(const ScalarField& rho) const;

    // h(rho) + grad p(rho), the velocity offset entering the construction.
    VectorField offset(const ScalarField& rho) const;
};

// p(rho) = rho^gamma, gamma >= 1, valid on (0, inf).
ModelFunctions make_power_law(int dim, double gamma, HSpec h = {});

// Singular cost p(rho) = (1/rho - 1/rho_bar)^(-gamma) on (0, rho_bar).
// Evaluation beyond rho_bar*(1 - guard_margin) raises DomainViolation.
// P comes from adaptive quadrature anchored at rho_bar/2 (abs tol 1e-12).
ModelFunctions make_singular_cost(int dim, double gamma, double rho_bar, HSpec h = {},
                                  double guard_margin = 1e-3);

// Tabulated law: rows (rho, p, p', h_1..h_dim), natural cubic interpolation.
ModelFunctions make_custom_table(int dim, const std::vector<std::vector<double>>& rows);
ModelFunctions load_custom_table_csv(int dim, const std::string& path);

// Finite-difference validation of the stored derivatives (relative error
// <= tol at step h_fd against centered differences of p and h) plus the
// P' == Q' identity on sample points. Throws BadConfig on failure.
void validate_model(const ModelFunctions& m, double rho_lo, double rho_hi, int samples = 33,
                    double tol = 1e-6, double h_fd = 1e-5);

// --- model-equivalence identity checks -------------------------------------

// Traveling-wave manufactured data: every field is a function of x - c t, so
// time derivatives are exact spectral advections, -(c . grad).
struct Wave1D {
    ScalarField rho; // 1-D grid
    ScalarField u;
    double speed = 1.0;
};

struct Equivalence1DReport {
    double continuity_residual; // |drho/dt + d(rho u)/dx|_inf
    double ar_residual;         // second-order-model momentum residual, sup norm
    double ns_residual;         // viscous-system momentum residual, sup norm
    double discrepancy_abs;     // |AR - NS|_inf; exactly linear in the continuity defect
    double discrepancy;         // |AR - NS|_inf / max(1, |NS|_inf)
};

// Verifies that the second-order model with offset (mu/rho^2) d_x rho and the
// viscous system share momentum residuals, modulo the continuity defect.
// Throws ContinuityViolated if the pair breaks mass conservation beyond tol.
Equivalence1DReport check_1d_equivalence(const Wave1D& wave,
                                         const std::function<double(double)>& mu,
                                         double tol_continuity = 1e-10);

struct WaveNd {
    ScalarField rho;
    VectorField u;
    std::vector<double> velocity; // wave velocity vector, dim entries
};

struct ViscousFormReport {
    double continuity_residual;
    double discrepancy; // sup norm of (offset-form) - (viscous-form), relative
};

// d-dimensional analogue with h = 0 and offset grad p(rho): the momentum
// operator in offset variables equals the viscous-form operator
//   d_t(rho u) + div(rho u x u) - grad(rho Q'(rho) div u) - L[grad Q, grad u],
//   L_j = sum_i (d_i Q d_j u_i - d_j Q d_i u_i),
// modulo continuity. Throws ContinuityViolated beyond tolerance.
ViscousFormReport check_viscous_form_identity(const WaveNd& wave, const ModelFunctions& m,
                                              double tol_continuity = 1e-10);

} // namespace awr
