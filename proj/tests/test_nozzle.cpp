#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qlab/nozzle.hpp"

using namespace qlab;

namespace {

// independent brute-force Gaussian elimination with partial pivoting
Eigen::VectorXd eliminate(Eigen::MatrixXd A, Eigen::VectorXd b) {
    const int n = static_cast<int>(A.rows());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(piv, col))) piv = r;
        A.row(col).swap(A.row(piv));
        std::swap(b(col), b(piv));
        for (int r = col + 1; r < n; ++r) {
            double f = A(r, col) / A(col, col);
            A.row(r) -= f * A.row(col);
            b(r) -= f * b(col);
        }
    }
    Eigen::VectorXd x(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b(r);
        for (int c = r + 1; c < n; ++c) acc -= A(r, c) * x(c);
        x(r) = acc / A(r, r);
    }
    return x;
}

}  // namespace

TEST_CASE("build_case dimensions and validation") {
    NozzleCase c8 = build_case(8, Regime::incompressible, SolverKind::simple);
    CHECK(assemble_system(c8, initial_state(c8)).A.rows() == 16);
    NozzleCase c2 = build_case(2, Regime::incompressible, SolverKind::coupled);
    CHECK(assemble_system(c2, initial_state(c2)).A.rows() == 4);
    NozzleCase c16 = build_case(16, Regime::compressible, SolverKind::coupled);
    CHECK(assemble_system(c16, initial_state(c16)).A.rows() == 32);
    CHECK_THROWS_AS(build_case(1, Regime::incompressible, SolverKind::simple), InvalidCase);
    CHECK(c8.eps_tol == 1e-9);
}

TEST_CASE("area profile is positive with one interior throat") {
    NozzleCase c = build_case(16, Regime::incompressible, SolverKind::simple);
    CHECK((c.area_cells.array() > 0.0).all());
    int switches = 0;
    for (int i = 1; i < c.s; ++i) {
        bool rising_here = c.area_cells[i] > c.area_cells[i - 1];
        bool rising_prev = i >= 2 && c.area_cells[i - 1] > c.area_cells[i - 2];
        if (i >= 2 && rising_here && !rising_prev) ++switches;
    }
    CHECK(switches == 1);  // decreasing then increasing: one throat
    double amin = c.area_cells.minCoeff();
    CHECK(amin < c.area_cells[0]);
    CHECK(amin < c.area_cells[c.s - 1]);
}

TEST_CASE("assemble_system residual algebra") {
    NozzleCase c = build_case(8, Regime::incompressible, SolverKind::simple);
    FlowState st = initial_state(c);
    LinearSystem sys = assemble_system(c, st);
    CHECK(sys.residual_l2 == doctest::Approx(sys.rhs.norm()).epsilon(1e-15));
    CHECK(sys.residual_l2 > 0.0);

    // delta-b = b - A x identity
    Eigen::VectorXd b = full_rhs(sys, st);
    Eigen::VectorXd x(2 * c.s);
    x.head(c.s) = st.velocity;
    x.tail(c.s) = st.pressure;
    CHECK((sys.rhs - (b - sys.A * x)).lpNorm<Eigen::Infinity>() < 1e-12);

    FlowState bad = st;
    bad.velocity[0] = std::nan("");
    CHECK_THROWS_AS(assemble_system(c, bad), AssemblyError);
}

TEST_CASE("residual decreases over the first outer iterations") {
    NozzleCase c = build_case(8, Regime::incompressible, SolverKind::simple);
    ConvergenceReport rep = run_outer_loop(c);
    REQUIRE(rep.residual_history.size() >= 10);
    CHECK(rep.residual_history[9] < rep.residual_history[0]);
    for (int i = 1; i < 10; ++i) CHECK(rep.residual_history[i] <= rep.residual_history[i - 1] * 1.5);
}

TEST_CASE("solve_linear identity and oracle comparison") {
    LinearSystem sys;
    sys.A = Eigen::MatrixXd::Identity(4, 4);
    sys.rhs = Eigen::VectorXd::Unit(4, 0);
    sys.residual_l2 = 1.0;
    CorrectionVector cv = solve_linear(sys);
    CHECK((cv.values - Eigen::VectorXd::Unit(4, 0)).norm() < 1e-14);
    CHECK(std::abs(cv.normalised.norm() - 1.0) < 1e-12);

    // random well-conditioned 16x16 system
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::MatrixXd R(16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) R(i, j) = g(rng);
    R += 8.0 * Eigen::MatrixXd::Identity(16, 16);
    LinearSystem s2;
    s2.A = R;
    s2.rhs = Eigen::VectorXd::NullaryExpr(16, [&](Eigen::Index) { return g(rng); });
    s2.residual_l2 = s2.rhs.norm();
    CorrectionVector c2 = solve_linear(s2);
    CHECK((s2.A * c2.values - s2.rhs).norm() <= 1e-10 * s2.rhs.norm());

    // first-iteration nozzle system vs brute-force elimination
    NozzleCase c = build_case(8, Regime::incompressible, SolverKind::simple);
    LinearSystem s3 = assemble_system(c, initial_state(c));
    Eigen::VectorXd oracle = eliminate(s3.A, s3.rhs);
    CHECK((solve_linear(s3).values - oracle).lpNorm<Eigen::Infinity>() < 1e-9);

    LinearSystem sing;
    sing.A = Eigen::MatrixXd::Zero(3, 3);
    sing.rhs = Eigen::VectorXd::Ones(3);
    sing.residual_l2 = sing.rhs.norm();
    CHECK_THROWS_AS(solve_linear(sing), SolverError);
}

TEST_CASE("outer loop converges for all regime/solver combinations") {
    for (Regime reg : {Regime::incompressible, Regime::compressible}) {
        for (SolverKind sol : {SolverKind::simple, SolverKind::coupled}) {
            NozzleCase c = build_case(8, reg, sol);
            ConvergenceReport rep = run_outer_loop(c);
            INFO("regime=", static_cast<int>(reg), " solver=", static_cast<int>(sol));
            CHECK(rep.converged);
            CHECK(rep.final_residual < 1e-9);
            // fixed point: re-assembling at the final state stays converged
            LinearSystem sys = assemble_system(c, rep.final_state);
            CHECK(sys.residual_l2 <= c.eps_tol);
        }
    }
    NozzleCase c16 = build_case(16, Regime::compressible, SolverKind::coupled);
    CHECK(run_outer_loop(c16).converged);
    NozzleCase c16s = build_case(16, Regime::compressible, SolverKind::simple);
    CHECK(run_outer_loop(c16s).converged);
    NozzleCase c32 = build_case(32, Regime::compressible, SolverKind::simple);
    CHECK(run_outer_loop(c32).converged);
}

TEST_CASE("solve/assemble residual contract holds along the run") {
    NozzleCase c = build_case(8, Regime::compressible, SolverKind::simple);
    FlowState st = initial_state(c);
    for (int it = 0; it < 20; ++it) {
        LinearSystem sys = assemble_system(c, st);
        CorrectionVector cv = solve_linear(sys);
        CHECK((sys.A * cv.values - sys.rhs).norm() <= 1e-10 * sys.rhs.norm());
        double mc = cv.values.lpNorm<Eigen::Infinity>();
        if (mc > 0.02) cv.values *= 0.02 / mc;
        st.velocity += cv.values.head(c.s);
        st.pressure += cv.values.tail(c.s);
        st.density = st.pressure / c.rt;
    }
}

TEST_CASE("noiseless runs are deterministic and incompressible density is constant") {
    NozzleCase c = build_case(8, Regime::incompressible, SolverKind::simple);
    ConvergenceReport r1 = run_outer_loop(c);
    ConvergenceReport r2 = run_outer_loop(c);
    REQUIRE(r1.residual_history.size() == r2.residual_history.size());
    for (size_t i = 0; i < r1.residual_history.size(); ++i)
        CHECK(r1.residual_history[i] == r2.residual_history[i]);
    CHECK((r1.final_state.density.array() == 1.0).all());
}

TEST_CASE("zeroing corrector never converges") {
    NozzleCase c = build_case(8, Regime::incompressible, SolverKind::simple);
    c.max_outer_iterations = 200;
    ConvergenceReport rep = run_outer_loop(c, [](const CorrectionVector& v) {
        CorrectionVector out = v;
        out.values.setZero();
        out.normalised.setZero();
        return out;
    });
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 200);
}

TEST_CASE("subnormalisation kappa") {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
    CHECK(subnormalisation_kappa(I) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(subnormalisation_kappa(2.0 * I) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    Eigen::MatrixXd Dg = Eigen::Vector2d(1.0, 0.25).asDiagonal();
    CHECK(subnormalisation_kappa(Dg) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Eigen::MatrixXd A(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) = g(rng);
    A += 4.0 * Eigen::MatrixXd::Identity(6, 6);
    double k = subnormalisation_kappa(A);
    CHECK(subnormalisation_kappa(-A) == doctest::Approx(k).epsilon(1e-10));
    CHECK(subnormalisation_kappa(3.0 * A) == doctest::Approx(k / 9.0).epsilon(1e-10));

    CHECK_THROWS_AS(subnormalisation_kappa(Eigen::MatrixXd::Zero(3, 3)), SolverError);
}
