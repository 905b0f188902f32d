#include "qlab/nozzle.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace qlab {

namespace {
constexpr double kAreaInlet = 1.0;
constexpr double kAreaThroat = 0.5;
// Safeguard against overshooting updates early in the compressible runs:
// a raw first correction can zero an upwind diagonal. Scaling the step to a
// bounded max component keeps the linearisation valid without changing the
// fixed point.
constexpr double kMaxStep = 0.02;
}  // namespace

double channel_area(double x) {
    return kAreaThroat + (kAreaInlet - kAreaThroat) * (2.0 * x - 1.0) * (2.0 * x - 1.0);
}

NozzleCase build_case(int s, Regime regime, SolverKind solver) {
    if (s < 2) throw InvalidCase("build_case: station count must be >= 2, got " + std::to_string(s));
    NozzleCase c;
    c.s = s;
    c.regime = regime;
    c.solver = solver;
    double dx = 1.0 / s;
    c.area_cells.resize(s);
    c.area_faces.resize(s);
    for (int i = 0; i < s; ++i) {
        c.area_cells[i] = channel_area((i + 0.5) * dx);
        c.area_faces[i] = channel_area((i + 1.0) * dx);
    }
    c.area_inlet = channel_area(0.0);
    return c;
}

FlowState initial_state(const NozzleCase& c) {
    FlowState st;
    st.velocity = Eigen::VectorXd::Ones(c.s);
    st.pressure = Eigen::VectorXd::Ones(c.s);
    st.density = Eigen::VectorXd::Ones(c.s);
    st.iteration = 0;
    return st;
}

namespace {

Eigen::VectorXd density_of(const NozzleCase& c, const Eigen::VectorXd& p) {
    if (c.regime == Regime::compressible) return p / c.rt;
    return Eigen::VectorXd::Ones(p.size());
}

struct Blocks {
    Eigen::MatrixXd M, G, D, Cp;
    Eigen::VectorXd r_u, r_c;
};

// Linearised momentum/continuity blocks and physical residuals at (u, p).
// Momentum CV around face j; continuity over cell i. First-order upwinding
// on both the convected velocity and the face density.
Blocks assemble_blocks(const NozzleCase& c, const FlowState& st) {
    const int s = c.s;
    const Eigen::VectorXd& u = st.velocity;
    const Eigen::VectorXd& p = st.pressure;
    if (!u.allFinite() || !p.allFinite()) throw AssemblyError("assemble_system: non-finite state");
    Eigen::VectorXd rho = density_of(c, p);
    if ((rho.array() <= 0.0).any()) throw AssemblyError("assemble_system: non-positive density");

    // Face mass fluxes, upwinded density; inlet flux uses the first cell.
    double md_in = rho[0] * c.u_inlet * c.area_inlet;
    Eigen::VectorXd md(s);
    for (int j = 0; j < s; ++j) {
        double rf = (u[j] >= 0.0) ? rho[j] : rho[std::min(j + 1, s - 1)];
        md[j] = rf * u[j] * c.area_faces[j];
    }

    Blocks b;
    b.M = Eigen::MatrixXd::Zero(s, s);
    b.G = Eigen::MatrixXd::Zero(s, s);
    b.D = Eigen::MatrixXd::Zero(s, s);
    b.Cp = Eigen::MatrixXd::Zero(s, s);
    Eigen::VectorXd b_u = Eigen::VectorXd::Zero(s);

    // Momentum CV boundary fluxes sit at cell centres: interpolate.
    Eigen::VectorXd Fc(s + 1);
    Fc[0] = 0.5 * (md_in + md[0]);
    for (int i = 1; i < s; ++i) Fc[i] = 0.5 * (md[i - 1] + md[i]);
    Fc[s] = md[s - 1];

    for (int j = 0; j < s; ++j) {
        double Fw = Fc[j], Fe = Fc[j + 1];
        if (Fw >= 0.0) {
            if (j == 0)
                b_u[j] += Fw * c.u_inlet;
            else
                b.M(j, j - 1) -= Fw;
        } else {
            b.M(j, j) -= Fw;
        }
        if (Fe >= 0.0 || j == s - 1)
            b.M(j, j) += Fe;
        else
            b.M(j, j + 1) += Fe;
        b.G(j, j) = -c.area_faces[j];
        if (j + 1 < s)
            b.G(j, j + 1) = c.area_faces[j];
        else
            b_u[j] -= c.area_faces[j] * c.p_outlet;
    }
    b.r_u = b_u - b.M * u - b.G * p;

    // Continuity: md_i - md_{i-1} = 0 per cell.
    for (int i = 0; i < s; ++i) {
        double rho_up_e = (u[i] >= 0.0) ? rho[i] : rho[std::min(i + 1, s - 1)];
        b.D(i, i) += rho_up_e * c.area_faces[i];
        if (c.regime == Regime::compressible) {
            int iup = (u[i] >= 0.0) ? i : std::min(i + 1, s - 1);
            b.Cp(i, iup) += u[i] * c.area_faces[i] / c.rt;
        }
        if (i == 0) {
            if (c.regime == Regime::compressible) b.Cp(i, 0) -= c.u_inlet * c.area_inlet / c.rt;
        } else {
            double rho_up_w = (u[i - 1] >= 0.0) ? rho[i - 1] : rho[i];
            b.D(i, i - 1) -= rho_up_w * c.area_faces[i - 1];
            if (c.regime == Regime::compressible) {
                int iup = (u[i - 1] >= 0.0) ? i - 1 : i;
                b.Cp(i, iup) -= u[i - 1] * c.area_faces[i - 1] / c.rt;
            }
        }
    }
    b.r_c.resize(s);
    b.r_c[0] = -(md[0] - md_in);
    for (int i = 1; i < s; ++i) b.r_c[i] = -(md[i] - md[i - 1]);
    return b;
}

}  // namespace

LinearSystem assemble_system(const NozzleCase& c, const FlowState& st) {
    const int s = c.s;
    Blocks b = assemble_blocks(c, st);
    LinearSystem sys;
    sys.A = Eigen::MatrixXd::Zero(2 * s, 2 * s);
    if (c.solver == SolverKind::coupled) {
        sys.A.topLeftCorner(s, s) = b.M;
        sys.A.topRightCorner(s, s) = b.G;
        sys.A.bottomLeftCorner(s, s) = b.D;
        sys.A.bottomRightCorner(s, s) = b.Cp;
    } else {
        // SIMPLE expressed as one linear system: solving A*dx = rhs with
        //   A = [ Mrel   -(1/w_p) Mrel C ]
        //       [ D       (1/w_p) Cp     ]
        // reproduces the classic predictor/pressure-correction step, with
        // C the d_j-weighted correction stencil and Mrel the relaxed
        // momentum matrix.
        Eigen::MatrixXd Mrel = b.M;
        for (int j = 0; j < s; ++j) Mrel(j, j) += (1.0 / c.omega_u - 1.0) * std::abs(b.M(j, j));
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(s, s);
        for (int j = 0; j < s; ++j) {
            double dj = c.area_faces[j] / Mrel(j, j);
            C(j, j) = dj;
            if (j + 1 < s) C(j, j + 1) = -dj;
        }
        sys.A.topLeftCorner(s, s) = Mrel;
        sys.A.topRightCorner(s, s) = -(1.0 / c.omega_p) * (Mrel * C);
        sys.A.bottomLeftCorner(s, s) = b.D;
        sys.A.bottomRightCorner(s, s) = (1.0 / c.omega_p) * b.Cp;
    }
    sys.rhs.resize(2 * s);
    sys.rhs.head(s) = b.r_u;
    sys.rhs.tail(s) = b.r_c;
    sys.residual_l2 = sys.rhs.norm();
    return sys;
}

Eigen::VectorXd full_rhs(const LinearSystem& sys, const FlowState& st) {
    const int s = static_cast<int>(st.velocity.size());
    Eigen::VectorXd x(2 * s);
    x.head(s) = st.velocity;
    x.tail(s) = st.pressure;
    return sys.rhs + sys.A * x;
}

CorrectionVector solve_linear(const LinearSystem& sys) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.A);
    Eigen::VectorXd dx = lu.solve(sys.rhs);
    double denom = sys.rhs.norm();
    double resid = (sys.A * dx - sys.rhs).norm();
    if (!dx.allFinite() || (denom > 0.0 && resid > 1e-10 * denom)) {
        double cond = 0.0;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A);
        double smin = svd.singularValues()(svd.singularValues().size() - 1);
        double smax = svd.singularValues()(0);
        cond = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
        throw SolverError("solve_linear: system singular or ill-conditioned", cond);
    }
    CorrectionVector cv;
    cv.values = dx;
    double n = dx.norm();
    cv.normalised = (n > 0.0) ? Eigen::VectorXd(dx / n) : dx;
    return cv;
}

CorrectionVector identity_corrector(const CorrectionVector& v) { return v; }

ConvergenceReport run_outer_loop(const NozzleCase& c, const Corrector& corrector) {
    const int s = c.s;
    ConvergenceReport rep;
    FlowState st = initial_state(c);
    for (int it = 0; it < c.max_outer_iterations; ++it) {
        LinearSystem sys = assemble_system(c, st);
        CorrectionVector cv;
        try {
            cv = solve_linear(sys);
        } catch (const SolverError&) {
            rep.final_state = st;
            rep.converged = false;
            return rep;
        }
        double maxcorr = cv.values.lpNorm<Eigen::Infinity>();
        rep.residual_history.push_back(sys.residual_l2);
        rep.correction_history.push_back(maxcorr);
        rep.final_residual = sys.residual_l2;
        rep.final_max_correction = maxcorr;
        rep.iterations = it + 1;
        // Convergence is judged on the clean solver output, before any
        // corruption by the corrector: the loop stops once the next update
        // would be below tolerance and the physical residual already is.
        if (maxcorr <= c.eps_tol && sys.residual_l2 <= c.eps_tol) {
            rep.converged = true;
            rep.final_state = st;
            return rep;
        }
        if (maxcorr > kMaxStep) {
            cv.values *= kMaxStep / maxcorr;
            double n = cv.values.norm();
            cv.normalised = (n > 0.0) ? Eigen::VectorXd(cv.values / n) : cv.values;
        }
        if (corrector) {
            const double raw_u = cv.values.head(s).lpNorm<Eigen::Infinity>();
            const double raw_p = cv.values.tail(s).lpNorm<Eigen::Infinity>();
            cv = corrector(cv);
            if (!cv.values.allFinite()) {
                rep.final_state = st;
                rep.converged = false;
                return rep;
            }
            rep.final_max_correction = cv.values.lpNorm<Eigen::Infinity>();
            // A measurement cutoff can zero out every component of one
            // parameter block; the measured correction to that parameter is
            // then below any tolerance and the loop stops. This only applies
            // to blocks the measurement itself zeroed: a block the clean
            // solver already left at zero says nothing about the measurement,
            // and a correction that is zero everywhere carries no information
            // and is not treated as convergence.
            double block_u = cv.values.head(s).lpNorm<Eigen::Infinity>();
            double block_p = cv.values.tail(s).lpNorm<Eigen::Infinity>();
            bool zeroed_u = (raw_u > 0.0 && block_u == 0.0);
            bool zeroed_p = (raw_p > 0.0 && block_p == 0.0);
            if (rep.final_max_correction > 0.0 && (zeroed_u || zeroed_p)) {
                rep.converged = true;
                rep.final_state = st;
                return rep;
            }
        }
        st.velocity += cv.values.head(s);
        st.pressure += cv.values.tail(s);
        if (c.regime == Regime::compressible) st.density = st.pressure / c.rt;
        st.iteration = it + 1;
        if (!st.velocity.allFinite() || !st.pressure.allFinite() ||
            (c.regime == Regime::compressible && (st.density.array() <= 0.0).any())) {
            rep.final_state = st;
            rep.converged = false;
            return rep;
        }
    }
    rep.final_state = st;
    rep.converged = false;
    return rep;
}

double subnormalisation_kappa(const Eigen::MatrixXd& A) {
    if (A.size() == 0 || A.isZero(0.0)) throw SolverError("subnormalisation_kappa: zero matrix");
    double inf_norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin <= 0.0) throw SolverError("subnormalisation_kappa: singular matrix");
    return 2.0 / (3.0 * inf_norm * smin);
}

}  // namespace qlab
