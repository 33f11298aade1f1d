#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "awr/errors.hpp"
#include "awr/mean_drift.hpp"
#include "awr/profile.hpp"
#include "awr/spectral.hpp"
#include "awr/subsolution.hpp"
#include "test_fixtures.hpp"
#include "test_util.hpp"

using namespace awr;
using testutil::TwoModeFixture;
using testutil::sine_density;

namespace {

constexpr double kPi = 3.14159265358979323846;

void random_symmetric(std::mt19937_64& rng, double* A, int d, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const double v = dist(rng);
            A[i * d + j] = v;
            A[j * d + i] = v;
        }
}

double frobenius(const double* A, int d) {
    double s = 0.0;
    for (int i = 0; i < d * d; ++i) s += A[i] * A[i];
    return std::sqrt(s);
}

double char_poly(const double* A, int d, double lam) {
    if (d == 2) return (A[0] - lam) * (A[3] - lam) - A[1] * A[1];
    const double a = A[0] - lam, b = A[4] - lam, c = A[8] - lam;
    return a * (b * c - A[5] * A[5]) - A[1] * (A[1] * c - A[5] * A[2]) +
           A[2] * (A[1] * A[5] - b * A[2]);
}

} // namespace

TEST_CASE("largest eigenvalue closed forms") {
    const double d2a[] = {2.0, 0.0, 0.0, -2.0};
    CHECK(lambda_max(d2a, 2) == 2.0);
    const double d2b[] = {2.0, 1.0, 1.0, 2.0};
    CHECK(lambda_max(d2b, 2) == doctest::Approx(3.0).epsilon(1e-14));
    const double d3a[] = {1, 0, 0, 0, 2, 0, 0, 0, 3};
    CHECK(lambda_max(d3a, 3) == doctest::Approx(3.0).epsilon(1e-14));
    const double d3b[] = {2, 1, 0, 1, 2, 0, 0, 0, 1};
    CHECK(lambda_max(d3b, 3) == doctest::Approx(3.0).epsilon(1e-14));
    const double scal[] = {0.7, 0, 0, 0, 0.7, 0, 0, 0, 0.7};
    CHECK(lambda_max(scal, 3) == 0.7);
    CHECK(lambda_max(scal, 1) == 0.7);

    // Shift invariance: lambda_max(A + s I) = lambda_max(A) + s.
    std::mt19937_64 rng(41);
    for (int it = 0; it < 200; ++it) {
        for (int d : {2, 3}) {
            double A[9], B[9];
            random_symmetric(rng, A, d);
            const double s = 0.375; // exactly representable
            for (int i = 0; i < d * d; ++i) B[i] = A[i];
            for (int i = 0; i < d; ++i) B[i * d + i] += s;
            CHECK(std::abs(lambda_max(B, d) - lambda_max(A, d) - s) <= 1e-13);
        }
    }
}

TEST_CASE("largest eigenvalue dominates Rayleigh quotients and kills the characteristic polynomial") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int d : {2, 3}) {
        for (int it = 0; it < 50; ++it) {
            double A[9];
            random_symmetric(rng, A, d);
            const double lam = lambda_max(A, d);

            double trace = 0.0;
            for (int i = 0; i < d; ++i) trace += A[i * d + i];
            CHECK(lam >= trace / d - 1e-13);

            const double nf = frobenius(A, d);
            CHECK(std::abs(char_poly(A, d, lam)) <= 1e-10 * std::pow(1.0 + nf, d));

            double best = -1e300;
            for (int v = 0; v < 2000; ++v) {
                double w[3] = {0, 0, 0}, n2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    w[c] = dist(rng);
                    n2 += w[c] * w[c];
                }
                if (n2 == 0.0) continue;
                double q = 0.0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) q += w[i] * A[i * d + j] * w[j];
                best = std::max(best, q / n2);
            }
            CHECK(best <= lam + 1e-10);
        }
    }
}

TEST_CASE("largest eigenvalue is 1-Lipschitz in the Frobenius norm") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> amp(-2.0, 2.0);
    for (int d : {2, 3}) {
        for (int it = 0; it < 5000; ++it) {
            double A[9], E[9], B[9];
            random_symmetric(rng, A, d);
            random_symmetric(rng, E, d, it % 2 ? 1e-6 : 1.0);
            for (int i = 0; i < d * d; ++i) B[i] = A[i] + amp(rng) * 0.0 + E[i];
            const double gap = std::abs(lambda_max(A, d) - lambda_max(B, d));
            CHECK(gap <= frobenius(E, d) + 1e-12);
        }
    }
}

TEST_CASE("kinetic bound holds on random trace-free fuzz") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::uniform_real_distribution<double> logs(-3.0, 3.0);
    for (int d : {2, 3}) {
        int failures = 0;
        for (int it = 0; it < 20000; ++it) {
            const double sw = std::pow(10.0, logs(rng));
            const double sb = std::pow(10.0, logs(rng));
            double w[3] = {0, 0, 0}, B[9];
            for (int c = 0; c < d; ++c) w[c] = sw * dist(rng);
            random_symmetric(rng, B, d, sb);
            double tr = 0.0;
            for (int i = 0; i < d; ++i) tr += B[i * d + i];
            for (int i = 0; i < d; ++i) B[i * d + i] -= tr / d;

            double w2 = 0.0;
            for (int c = 0; c < d; ++c) w2 += w[c] * w[c];
            const double scale = std::max({1.0, w2, frobenius(B, d)});
            if (check_pointwise_inequality(w, B, d) < -1e-12 * scale) ++failures;
        }
        CHECK(failures == 0);
    }

    // Closed-form case: w = (3,4), B = 0 gives lambda_max = |w|^2 = 25 and
    // slack 2*25 - 12.5 exactly.
    const double w34[] = {3.0, 4.0};
    const double zero[] = {0.0, 0.0, 0.0, 0.0};
    CHECK(check_pointwise_inequality(w34, zero, 2) == 37.5);

    // w = 0 leaves the (nonnegative) -lambda_min of the trace-free matrix.
    const double wz[] = {0.0, 0.0};
    const double b2[] = {0.5, 0.25, 0.25, -0.5};
    CHECK(check_pointwise_inequality(wz, b2, 2) >= 0.0);

    const double eye[] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const double w3[] = {1.0, 0.0, 0.0};
    try {
        check_pointwise_inequality(w3, eye, 3);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotTraceless);
    }
}

TEST_CASE("affine bundle carries clean path and endpoint fields") {
    const TwoModeFixture fx(32, 9);
    const SubsolutionBundle b = fx.bundle();
    const TimeGrid& tg = fx.profile.time;

    CHECK(testutil::max_abs_diff(b.v.front(), fx.data.parts0.v) == 0.0);
    CHECK(testutil::max_abs_diff(b.v.back(), fx.data.partsT.v) == 0.0);

    for (int k = 0; k < tg.n_t; ++k) {
        const double scale = std::max(1.0, linf_norm(b.v[k]));
        CHECK(linf_norm(divergence(b.v[k])) <= 1e-12 * scale);
        for (int c = 0; c < 2; ++c) CHECK(std::abs(mean(b.v[k][c])) <= 1e-12 * scale);
    }

    // The affine flux closes the transport identity d_t v + div(F) = 0.
    const VectorField dtv = (1.0 / tg.T) * (fx.data.partsT.v - fx.data.parts0.v);
    const VectorField divF = div_tensor(b.F);
    CHECK(testutil::max_abs_diff(divF, -1.0 * dtv) <= 1e-9);

    // Dirty path data is rejected.
    const VectorField gradient = grad(sine_density(fx.g, 0.0, 1.0, 0));
    try {
        assemble_subsolution(fx.profile, fx.drift, fx.model, gradient, fx.data.partsT.v);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotSolenoidal);
    }
    VectorField with_mean = fx.data.parts0.v;
    for (std::size_t p = 0; p < with_mean[0].size(); ++p) with_mean[0][p] += 0.5;
    try {
        assemble_subsolution(fx.profile, fx.drift, fx.model, with_mean, fx.data.partsT.v);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonZeroMean);
    }
}

TEST_CASE("margin schedule leaves the requested gap") {
    const TwoModeFixture fx(32, 9);
    SubsolutionBundle b = fx.bundle();

    try {
        check_membership(b);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadConfig); // no level installed yet
    }

    schedule_lambda_margin(b, 1.0);
    CHECK(b.eta == 1.0);
    const MembershipReport rep = check_membership(b);
    CHECK(rep.pass);
    CHECK(std::abs(rep.margin - 1.0) <= 1e-10);
    CHECK(static_cast<int>(rep.node_min.size()) == fx.profile.time.n_t);
    CHECK(rep.min_e >= rep.margin - 1e-12);
    for (double nm : rep.node_min) CHECK(nm >= 1.0 - 1e-10);

    // Doubling the margin shifts every level and the global margin by one.
    SubsolutionBundle b2 = fx.bundle();
    schedule_lambda_margin(b2, 2.0);
    const MembershipReport rep2 = check_membership(b2);
    CHECK(std::abs(rep2.margin - rep.margin - 1.0) <= 1e-10);
    for (int k = 0; k < fx.profile.time.n_t; ++k)
        CHECK(std::abs(b2.lambda[k] - b.lambda[k] - 1.0) <= 1e-12 * (1.0 + b.lambda[k]));

    // The kinetic peak dwarfs the margin here, so halving the level must
    // break membership.
    double peak = 0.0;
    for (double lk : b.lambda) peak = std::max(peak, lk - 1.0);
    REQUIRE(peak > 1.1);
    std::vector<double> half = b.lambda, dhalf = b.dlambda;
    for (double& x : half) x *= 0.5;
    for (double& x : dhalf) x *= 0.5;
    install_lambda(b2, half, dhalf);
    const MembershipReport broken = check_membership(b2);
    CHECK(broken.margin < 0.0);
    CHECK(!broken.pass);

    // Window restriction drops early nodes and can only raise the margin.
    const MembershipReport late = check_membership(b, 0.5);
    CHECK(late.node_time.front() > 0.5);
    CHECK(late.node_min.size() < rep.node_min.size());
    CHECK(late.margin >= rep.margin - 1e-15);
    try {
        check_membership(b, -0.1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadConfig);
    }
    try {
        check_membership(b, fx.profile.time.T);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadConfig);
    }

    try {
        schedule_lambda_margin(b, 0.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadConfig);
    }
}

TEST_CASE("trivial static data yields level equal to the margin") {
    const Grid g(2, 16);
    const ModelFunctions model = make_power_law(2, 1.0);
    const ScalarField rho(g, 2.0);
    const ScalarField zero(g);
    const VectorField vzero(g);
    const TimeGrid tg(1.0, 5);
    const DensityProfileBundle profile = build_profile(rho, rho, zero, zero, tg);
    const MeanDrift drift = build_mean_drift(profile, model, {0.0, 0.0});
    SubsolutionBundle b = assemble_subsolution(profile, drift, model, vzero, vzero);
    schedule_lambda_margin(b, 0.75);
    for (double lk : b.lambda) CHECK(lk == 0.75);
    const MembershipReport rep = check_membership(b);
    CHECK(rep.margin == 0.75);
    CHECK(rep.min_e == 0.75);
    CHECK(rep.pass);
}

TEST_CASE("membership margin survives in three dimensions") {
    const Grid g(3, 16);
    HSpec h;
    h.kind = HSpec::Kind::Linear;
    h.c = {0.1, -0.05, 0.02};
    const ModelFunctions model = make_power_law(3, 2.0, h);
    const ScalarField rho0 = sine_density(g, 2.0, 0.4, 0);
    const ScalarField rhoT = sine_density(g, 2.0, 0.4, 2);
    const VectorField u0 = make_vector_field(g, 3, [](const double* x, double* u) {
        u[0] = 0.8 * std::sin(kPi * x[1]);
        u[1] = 0.0;
        u[2] = 0.0;
    });
    const VectorField uT = make_vector_field(g, 3, [](const double* x, double* u) {
        u[0] = 0.0;
        u[1] = 0.5 * std::sin(kPi * x[2]);
        u[2] = 0.0;
    });
    const DataPair data = make_data_pair(rho0, u0, rhoT, uT);
    const TimeGrid tg(1.0, 5);
    const DensityProfileBundle profile =
        build_profile(data.rho0, data.rhoT, data.parts0.phi, data.partsT.phi, tg);
    const MeanDrift drift = build_mean_drift(profile, model, data.parts0.V, 1e-2);
    SubsolutionBundle b = assemble_subsolution(profile, drift, model, data.parts0.v, data.partsT.v);
    schedule_lambda_margin(b, 1.0);
    const MembershipReport rep = check_membership(b);
    CHECK(rep.pass);
    CHECK(std::abs(rep.margin - 1.0) <= 1e-9);
    CHECK(rep.min_e > 0.0);
}

TEST_CASE("admissible schedule follows the closed-form level decay") {
    const Grid g(2, 32);
    // Weak coupling: the decay rate and the offset equilibrium must leave the
    // level positive through t = T (the closed form below shows they do).
    HSpec h;
    h.kind = HSpec::Kind::Linear;
    h.c = {0.05, -0.02};
    const ModelFunctions model = make_power_law(2, 1.0, h);
    const ScalarField rho = sine_density(g, 2.0, 0.5, 0);
    const TimeGrid tg(1.0, 9);
    const AdmissibleSchedule sched = schedule_lambda_admissible(rho, model, 1.0, tg);

    // Grid extremes of the single-mode density and of |grad h| are exact.
    const AdmissibleConstants& c = sched.constants;
    CHECK(c.rho_min == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(c.rho_max == doctest::Approx(2.5).epsilon(1e-13));
    const double gh = std::sqrt(0.05 * 0.05 + 0.02 * 0.02) * 0.5 * kPi;
    CHECK(c.grad_h_inf == doctest::Approx(gh).epsilon(1e-12));

    /* The level ODE linearizes: with y = sqrt(2 L / rho_min),
     *   y' = -(2 rho_max grad_h_inf / rho_min) (y + offset_inf),
     * so y(t) = (y0 + C) exp(-a t) - C solves it in closed form. */
    const double a = 2.0 * c.rho_max * c.grad_h_inf / c.rho_min;
    const double C = c.offset_inf;
    const double y0 = std::sqrt(2.0 * 1.0 / c.rho_min);
    for (int k = 0; k < tg.n_t; ++k) {
        const double y = (y0 + C) * std::exp(-a * tg.node(k)) - C;
        REQUIRE(y > 0.0);
        const double expected = 0.5 * c.rho_min * y * y;
        CHECK(std::abs(sched.lambda[k] - expected) <= 1e-10);
        const double dexp = c.rho_min * y * (-a * (y + C));
        CHECK(std::abs(sched.dlambda[k] - dexp) <= 1e-8);
    }
    for (int k = 0; k + 1 < tg.n_t; ++k) CHECK(sched.lambda[k + 1] < sched.lambda[k]);
    CHECK(sched.certificate_defect <= 1e-10);

    // Substep refinement barely moves the endpoint level.
    const AdmissibleSchedule fine = schedule_lambda_admissible(rho, model, 1.0, tg, 128);
    CHECK(std::abs(fine.lambda.back() - sched.lambda.back()) <= 1e-8 * sched.lambda.back());
}

TEST_CASE("admissible schedule is constant without offset variation") {
    const Grid g(2, 16);
    const ScalarField rho = sine_density(g, 2.0, 0.5, 0);
    const TimeGrid tg(1.0, 5);

    const AdmissibleSchedule none =
        schedule_lambda_admissible(rho, make_power_law(2, 2.0), 1.0, tg);
    for (double lk : none.lambda) CHECK(lk == 1.0);
    for (double dk : none.dlambda) CHECK(dk == 0.0);
    CHECK(none.certificate_defect == 0.0);

    HSpec hc;
    hc.kind = HSpec::Kind::Constant;
    hc.c = {0.4, 0.2};
    const AdmissibleSchedule con =
        schedule_lambda_admissible(rho, make_power_law(2, 2.0, hc), 1.0, tg);
    for (double lk : con.lambda) CHECK(lk == 1.0);
}

TEST_CASE("admissible schedule reports depletion and bad configs") {
    const Grid g(2, 16);
    const ScalarField rho = sine_density(g, 2.0, 0.5, 0);
    const TimeGrid tg(1.0, 9);
    HSpec h;
    h.kind = HSpec::Kind::Linear;
    h.c = {5.0, 0.0};
    const ModelFunctions strong = make_power_law(2, 2.0, h);
    try {
        schedule_lambda_admissible(rho, strong, 1e-4, tg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LambdaDepleted);
    }
    try {
        schedule_lambda_admissible(rho, strong, 0.0, tg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadConfig);
    }
    try {
        schedule_lambda_admissible(rho, strong, 1.0, tg, 0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadConfig);
    }
    const ScalarField bad = sine_density(g, 0.5, 1.0, 0);
    try {
        schedule_lambda_admissible(bad, strong, 1.0, tg);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PositivityFailure);
    }
}

TEST_CASE("energy density matches its closed forms") {
    const Grid g(2, 32);
    HSpec h;
    h.kind = HSpec::Kind::Linear;
    h.c = {0.2, 0.1};
    const ModelFunctions model = make_power_law(2, 2.0, h);
    const ScalarField rho = sine_density(g, 2.0, 0.5, 0);

    // u canceling the offset exactly zeroes the energy.
    const VectorField off = model.offset(rho);
    const EnergyField zero = energy_field(rho, -1.0 * off, model);
    CHECK(linf_norm(zero.E) == 0.0);
    CHECK(zero.total == 0.0);

    // Constant density and no offset function: E = |u|^2 / 2.
    const ScalarField one(g, 1.0);
    const ModelFunctions plain = make_power_law(2, 2.0);
    const VectorField u = make_vector_field(g, 2, [](const double* x, double* w) {
        w[0] = 1.3 * std::sin(kPi * x[0]);
        w[1] = 0.0;
    });
    const EnergyField ef = energy_field(one, u, plain);
    const double expected_total = 0.5 * 1.3 * 1.3 * 2.0; // integral of sin^2 is 2
    CHECK(std::abs(ef.total - expected_total) <= 1e-12 * expected_total);
    for (std::size_t p = 0; p < ef.E.size(); ++p) CHECK(ef.E[p] >= -1e-15);
}

TEST_CASE("level interpolation reproduces nodes and preserves monotone decay") {
    const Grid g(2, 16);
    HSpec h;
    h.kind = HSpec::Kind::Linear;
    h.c = {0.05, -0.02};
    const ModelFunctions model = make_power_law(2, 1.0, h);
    const ScalarField rho = sine_density(g, 2.0, 0.5, 0);
    const TimeGrid tg(1.0, 9);
    const AdmissibleSchedule sched = schedule_lambda_admissible(rho, model, 1.0, tg);

    const ScalarField zero(g);
    const VectorField vzero(g);
    const DensityProfileBundle profile = build_profile(rho, rho, zero, zero, tg);
    const MeanDrift drift = build_mean_drift(profile, model, {0.0, 0.0});
    SubsolutionBundle b = assemble_subsolution(profile, drift, model, vzero, vzero);

    try {
        b.lambda_at(0.5);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadConfig);
    }

    install_lambda(b, sched.lambda, sched.dlambda);
    for (int k = 0; k < tg.n_t; ++k) CHECK(b.lambda_at(tg.node(k)) == sched.lambda[k]);
    double prev = b.lambda_at(0.0);
    for (int i = 1; i <= 200; ++i) {
        const double cur = b.lambda_at(i / 200.0);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
    // Clamping outside [0, T].
    CHECK(b.lambda_at(-1.0) == sched.lambda.front());
    CHECK(b.lambda_at(2.0) == sched.lambda.back());
}
