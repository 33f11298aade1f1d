#include "awr/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace awr {

double HSpec::value(int comp, double rho) const {
    switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return c[comp];
    case Kind::Linear: return c[comp] * rho;
    }
    return 0.0;
}

double HSpec::deriv(int comp, double rho) const {
    (void)rho;
    switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return 0.0;
    case Kind::Linear: return c[comp];
    }
    return 0.0;
}

void ModelFunctions::check_domain(double rho) const {
    if (rho <= lo || (hi > 0.0 && rho >= hi))
        fail(ErrorCode::DomainViolation,
             family + " law evaluated at rho = " + std::to_string(rho));
}

ScalarField ModelFunctions::compose_p(const ScalarField& rho) const {
    ScalarField out(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        check_domain(rho[i]);
        out[i] = p(rho[i]);
    }
    return out;
}

ScalarField ModelFunctions::compose_Pprime(const ScalarField& rho) const {
    ScalarField out(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        check_domain(rho[i]);
        out[i] = Pprime(rho[i]);
    }
    return out;
}

VectorField ModelFunctions::compose_h(const ScalarField& rho) const {
    VectorField out(rho.grid);
    for (int c = 0; c < rho.grid.dim; ++c)
        for (std::size_t i = 0; i < rho.size(); ++i) out[c][i] = h_value(c, rho[i]);
    return out;
}

VectorField ModelFunctions::offset(const ScalarField& rho) const {
    return compose_h(rho) + grad(compose_p(rho));
}

namespace {

// Adaptive Simpson with Richardson acceptance, absolute tolerance.
double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double tol) {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    if (a > b) std::swap(a, b);
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = simpson(a, b, fa, fm, fb);
    return sign * adapt(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Natural cubic spline through (x_i, y_i), x strictly increasing.
struct Spline {
    std::vector<double> x, y, m; // m = second derivatives at knots

    void build(std::vector<double> xs, std::vector<double> ys) {
        x = std::move(xs);
        y = std::move(ys);
        const int n = static_cast<int>(x.size());
        m.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
        b[0] = b[n - 1] = 1.0;
        for (int i = 1; i + 1 < n; ++i) {
            const double hi0 = x[i] - x[i - 1], hi1 = x[i + 1] - x[i];
            a[i] = hi0 / 6.0;
            b[i] = (hi0 + hi1) / 3.0;
            c[i] = hi1 / 6.0;
            r[i] = (y[i + 1] - y[i]) / hi1 - (y[i] - y[i - 1]) / hi0;
        }
        // Thomas algorithm
        for (int i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        m[n - 1] = r[n - 1] / b[n - 1];
        for (int i = n - 2; i >= 0; --i) m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
    }

    int segment(double t) const {
        auto it = std::upper_bound(x.begin(), x.end(), t);
        int i = static_cast<int>(it - x.begin()) - 1;
        return std::clamp(i, 0, static_cast<int>(x.size()) - 2);
    }

    double eval(double t) const {
        const int i = segment(t);
        const double h = x[i + 1] - x[i];
        const double A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
        return A * y[i] + B * y[i + 1] +
               ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
    }

    double deriv(double t) const {
        const int i = segment(t);
        const double h = x[i + 1] - x[i];
        const double A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
        return (y[i + 1] - y[i]) / h +
               ((3.0 * B * B - 1.0) * m[i + 1] - (3.0 * A * A - 1.0) * m[i]) * h / 6.0;
    }
};

void require_dim_coeffs(const HSpec& h, int dim) {
    if (h.kind != HSpec::Kind::Zero && static_cast<int>(h.c.size()) != dim)
        fail(ErrorCode::BadConfig, "offset coefficient count must equal dimension");
}

} // namespace

ModelFunctions make_power_law(int dim, double gamma, HSpec h) {
    if (gamma < 1.0) fail(ErrorCode::BadConfig, "power law requires gamma >= 1");
    require_dim_coeffs(h, dim);
    ModelFunctions m;
    m.dim = dim;
    m.lo = 0.0;
    m.hi = 0.0;
    m.family = "power";
    m.h = h;
    m.p = [gamma](double r) { return std::pow(r, gamma); };
    m.dp = [gamma](double r) { return gamma * std::pow(r, gamma - 1.0); };
    m.ddp = [gamma](double r) { return gamma * (gamma - 1.0) * std::pow(r, gamma - 2.0); };
    // P' = rho p' = gamma rho^gamma  =>  P = gamma rho^(gamma+1)/(gamma+1)
    m.P = [gamma](double r) { return gamma * std::pow(r, gamma + 1.0) / (gamma + 1.0); };
    m.Pprime = [gamma](double r) { return gamma * std::pow(r, gamma); };
    m.Qprime = [gamma](double r) { return gamma * std::pow(r, gamma); };
    return m;
}

ModelFunctions make_singular_cost(int dim, double gamma, double rho_bar, HSpec h,
                                  double guard_margin) {
    if (rho_bar <= 0.0) fail(ErrorCode::BadConfig, "singular cost requires rho_bar > 0");
    require_dim_coeffs(h, dim);
    ModelFunctions m;
    m.dim = dim;
    m.lo = 0.0;
    m.hi = rho_bar * (1.0 - guard_margin);
    m.family = "singular";
    m.h = h;
    const double rb = rho_bar;
    // s(rho) = 1/rho - 1/rho_bar, p = s^(-gamma)
    m.p = [gamma, rb](double r) { return std::pow(1.0 / r - 1.0 / rb, -gamma); };
    m.dp = [gamma, rb](double r) {
        const double s = 1.0 / r - 1.0 / rb;
        return gamma * std::pow(s, -gamma - 1.0) / (r * r);
    };
    m.ddp = [gamma, rb](double r) {
        const double s = 1.0 / r - 1.0 / rb;
        return gamma * ((gamma + 1.0) * std::pow(s, -gamma - 2.0) / (r * r * r * r) -
                        2.0 * std::pow(s, -gamma - 1.0) / (r * r * r));
    };
    auto pprime = m.dp;
    m.Pprime = [pprime](double r) { return r * pprime(r); };
    m.Qprime = [pprime](double r) { return r * pprime(r); };
    // No elementary antiderivative in general: integrate rho p' from rho_bar/2.
    const double ref = rb / 2.0;
    auto integrand = m.Pprime;
    m.P = [integrand, ref](double r) { return adaptive_quadrature(integrand, ref, r, 1e-12); };
    return m;
}

ModelFunctions make_custom_table(int dim, const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 4) fail(ErrorCode::BadConfig, "custom table needs at least 4 rows");
    const std::size_t want = 3 + static_cast<std::size_t>(dim);
    std::vector<double> rho, pv, dpv;
    std::vector<std::vector<double>> hv(dim);
    for (const auto& r : rows) {
        if (r.size() != want)
            fail(ErrorCode::BadConfig, "custom table rows need rho, p, p', h_1..h_dim");
        rho.push_back(r[0]);
        pv.push_back(r[1]);
        dpv.push_back(r[2]);
        for (int c = 0; c < dim; ++c) hv[c].push_back(r[3 + c]);
    }
    for (std::size_t i = 1; i < rho.size(); ++i)
        if (rho[i] <= rho[i - 1])
            fail(ErrorCode::BadConfig, "custom table densities must be strictly increasing");

    auto sp_p = std::make_shared<Spline>();
    sp_p->build(rho, pv);
    auto sp_dp = std::make_shared<Spline>();
    sp_dp->build(rho, dpv);
    std::vector<std::shared_ptr<Spline>> sp_h;
    for (int c = 0; c < dim; ++c) {
        sp_h.push_back(std::make_shared<Spline>());
        sp_h.back()->build(rho, hv[c]);
    }

    ModelFunctions m;
    m.dim = dim;
    m.lo = rho.front();
    m.hi = rho.back();
    m.family = "custom-table";
    m.p = [sp_p](double r) { return sp_p->eval(r); };
    m.dp = [sp_dp](double r) { return sp_dp->eval(r); };
    m.ddp = [sp_dp](double r) { return sp_dp->deriv(r); };
    m.Pprime = [sp_dp](double r) { return r * sp_dp->eval(r); };
    m.Qprime = [sp_dp](double r) { return r * sp_dp->eval(r); };
    const double ref = 0.5 * (rho.front() + rho.back());
    auto integrand = m.Pprime;
    m.P = [integrand, ref](double r) { return adaptive_quadrature(integrand, ref, r, 1e-12); };

    // Tabulated offsets: h interpolated per component; kind stays out of the
    // built-in enum, so wire the callbacks through a Linear-shaped custom hook.
    m.h.kind = HSpec::Kind::Zero;
    m.table_h = [sp_h](int comp, double r) { return sp_h[static_cast<std::size_t>(comp)]->eval(r); };
    m.table_dh = [sp_h](int comp, double r) {
        return sp_h[static_cast<std::size_t>(comp)]->deriv(r);
    };
    return m;
}

ModelFunctions load_custom_table_csv(int dim, const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::BadConfig, "cannot open table file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (...) {
                numeric = false;
                break;
            }
        }
        if (!numeric) continue; // header line
        rows.push_back(std::move(row));
    }
    return make_custom_table(dim, rows);
}

void validate_model(const ModelFunctions& m, double rho_lo, double rho_hi, int samples,
                    double tol, double h_fd) {
    for (int s = 0; s < samples; ++s) {
        const double r = rho_lo + (rho_hi - rho_lo) * (s + 0.5) / samples;
        const double fd_p = (m.p(r + h_fd) - m.p(r - h_fd)) / (2.0 * h_fd);
        const double fd_dp = (m.dp(r + h_fd) - m.dp(r - h_fd)) / (2.0 * h_fd);
        const double sc1 = std::max(1.0, std::abs(m.dp(r)));
        const double sc2 = std::max(1.0, std::abs(m.ddp(r)));
        if (std::abs(fd_p - m.dp(r)) / sc1 > tol)
            fail(ErrorCode::BadConfig, "pressure derivative fails finite-difference check");
        if (std::abs(fd_dp - m.ddp(r)) / sc2 > tol)
            fail(ErrorCode::BadConfig, "pressure curvature fails finite-difference check");
        for (int c = 0; c < m.dim; ++c) {
            const double fd_h =
                (m.h_value(c, r + h_fd) - m.h_value(c, r - h_fd)) / (2.0 * h_fd);
            if (std::abs(fd_h - m.h_deriv(c, r)) / std::max(1.0, std::abs(m.h_deriv(c, r))) >
                tol)
                fail(ErrorCode::BadConfig, "offset derivative fails finite-difference check");
        }
        // The two potentials must be one function.
        const double a = m.Pprime(r), b = m.Qprime(r);
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
            fail(ErrorCode::BadConfig, "transform and reformulation potentials disagree");
        // And the stored antiderivative must differentiate back to rho p'.
        const double fd_P = (m.P(r + h_fd) - m.P(r - h_fd)) / (2.0 * h_fd);
        if (std::abs(fd_P - a) / std::max(1.0, std::abs(a)) > tol)
            fail(ErrorCode::BadConfig, "pressure potential fails finite-difference check");
    }
}

// --- identity checks --------------------------------------------------------

Equivalence1DReport check_1d_equivalence(const Wave1D& wave,
                                         const std::function<double(double)>& mu,
                                         double tol_continuity) {
    const Grid& g = wave.rho.grid;
    if (g.dim != 1) fail(ErrorCode::BadConfig, "1-D equivalence check needs a 1-D grid");
    const double c = wave.speed;
    auto dx = [](const ScalarField& f) { return deriv(f, 0); };
    auto adv = [&](const ScalarField& f) { return -c * dx(f); }; // exact d/dt for waves

    const ScalarField& rho = wave.rho;
    const ScalarField& u = wave.u;
    ScalarField rho_u = multiply(rho, u);

    Equivalence1DReport rep{};
    ScalarField cont = adv(rho) + dx(rho_u);
    rep.continuity_residual = linf_norm(cont);
    if (rep.continuity_residual > tol_continuity)
        fail(ErrorCode::ContinuityViolated, "manufactured pair breaks mass conservation");

    // Offset variable: w = u + (mu/rho^2) d_x rho, so rho w = rho u + (mu/rho) d_x rho.
    ScalarField mu_field(g), mu_over_rho(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        mu_field[i] = mu(rho[i]);
        mu_over_rho[i] = mu_field[i] / rho[i];
    }
    ScalarField rho_w = rho_u + multiply(mu_over_rho, dx(rho));

    ScalarField r_ar = adv(rho_w) + dx(multiply(rho_w, u));
    ScalarField r_ns = adv(rho_u) + dx(multiply(rho_u, u)) - dx(multiply(mu_field, dx(u)));

    rep.ar_residual = linf_norm(r_ar);
    rep.ns_residual = linf_norm(r_ns);
    rep.discrepancy_abs = linf_norm(r_ar - r_ns);
    rep.discrepancy = rep.discrepancy_abs / std::max(1.0, rep.ns_residual);
    return rep;
}

ViscousFormReport check_viscous_form_identity(const WaveNd& wave, const ModelFunctions& m,
                                              double tol_continuity) {
    const Grid& g = wave.rho.grid;
    const int d = g.dim;
    if (m.h.kind != HSpec::Kind::Zero)
        fail(ErrorCode::BadConfig, "viscous-form identity is stated for zero velocity offset");
    if (static_cast<int>(wave.velocity.size()) != d)
        fail(ErrorCode::BadConfig, "wave velocity dimension mismatch");

    auto adv = [&](const ScalarField& f) {
        ScalarField out(g);
        for (int a = 0; a < d; ++a) axpy(-wave.velocity[a], deriv(f, a), out);
        return out;
    };

    const ScalarField& rho = wave.rho;
    const VectorField& u = wave.u;
    VectorField rho_u = multiply(rho, u);

    ViscousFormReport rep{};
    ScalarField cont = adv(rho) + divergence(rho_u);
    rep.continuity_residual = linf_norm(cont);
    if (rep.continuity_residual > tol_continuity)
        fail(ErrorCode::ContinuityViolated, "manufactured pair breaks mass conservation");

    // Offset side: w = u + grad p(rho).
    VectorField w = u + grad(m.compose_p(rho));
    VectorField rho_w = multiply(rho, w);
    VectorField lhs(g);
    for (int j = 0; j < d; ++j) {
        ScalarField s = adv(rho_w[j]);
        for (int i = 0; i < d; ++i) s = s + deriv(multiply(u[i], rho_w[j]), i);
        lhs[j] = s;
    }

    // Viscous side: transport of rho u plus the two reformulation terms.
    ScalarField divu = divergence(u);
    ScalarField rho_Qp(g); // rho Q'(rho) = rho^2 p'(rho)
    for (std::size_t i = 0; i < g.size(); ++i) {
        m.check_domain(rho[i]);
        rho_Qp[i] = rho[i] * m.Qprime(rho[i]);
    }
    VectorField gradQ = multiply(m.compose_Pprime(rho), grad(rho)); // grad Q = Q'(rho) grad rho
    MatField J = jacobian(u);                                       // J(i,j) = d_i u_j

    VectorField rhs(g);
    VectorField pressure_term = grad(multiply(rho_Qp, divu));
    for (int j = 0; j < d; ++j) {
        ScalarField s = adv(rho_u[j]);
        for (int i = 0; i < d; ++i) s = s + deriv(multiply(u[i], rho_u[j]), i);
        s = s - pressure_term[j];
        // L_j = sum_i (d_i Q d_j u_i - d_j Q d_i u_i)
        ScalarField L(g);
        for (int i = 0; i < d; ++i) L = L + multiply(gradQ[i], J.at(j, i));
        L = L - multiply(gradQ[j], divu);
        s = s - L;
        rhs[j] = s;
    }

    double num = 0.0;
    for (int j = 0; j < d; ++j) num = std::max(num, linf_norm(lhs[j] - rhs[j]));
    double den = 1.0;
    for (int j = 0; j < d; ++j) den = std::max(den, linf_norm(rhs[j]));
    rep.discrepancy = num / den;
    return rep;
}

} // namespace awr
