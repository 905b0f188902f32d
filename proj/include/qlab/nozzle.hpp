#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlab {

struct InvalidCase : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AssemblyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg, double cond = 0.0)
        : std::runtime_error(msg), condition_estimate(cond) {}
    double condition_estimate;
};

enum class Regime { incompressible, compressible };
enum class SolverKind { simple, coupled };

// Quasi-1D convergent-divergent channel on x in [0,1], area 0.5 + 0.5*(2x-1)^2.
// Staggered layout: pressures at the s cell centres, velocities at the s
// east faces of the cells. Inlet face carries a fixed velocity, the last cell
// sees a fixed outlet static pressure. Isothermal perfect gas when
// compressible: rho = p / RT.
struct NozzleCase {
    int s = 8;
    Regime regime = Regime::incompressible;
    SolverKind solver = SolverKind::simple;
    double eps_tol = 1e-9;
    int max_outer_iterations = 100000;
    double omega_u = 0.7;  // SIMPLE momentum under-relaxation
    double omega_p = 0.3;  // SIMPLE pressure under-relaxation
    double u_inlet = 0.1;
    double p_outlet = 1.0;
    double rt = 1.0;  // isothermal RT in rho = p/RT

    Eigen::VectorXd area_cells;  // cross-section at cell centres
    Eigen::VectorXd area_faces;  // cross-section at east faces
    double area_inlet = 1.0;
};

struct FlowState {
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;
    Eigen::VectorXd density;
    int iteration = 0;
};

struct LinearSystem {
    Eigen::MatrixXd A;    // 2s x 2s
    Eigen::VectorXd rhs;  // delta-b, length 2s
    double residual_l2 = 0.0;
};

struct CorrectionVector {
    Eigen::VectorXd values;      // delta-x, length 2s
    Eigen::VectorXd normalised;  // unit-L2 copy (zero vector stays zero)
};

struct ConvergenceReport {
    std::vector<double> residual_history;    // ||delta-b|| per outer iteration
    std::vector<double> correction_history;  // max |correction| per iteration
    double final_residual = 0.0;
    double final_max_correction = 0.0;
    int iterations = 0;
    bool converged = false;
    FlowState final_state;
};

using Corrector = std::function<CorrectionVector(const CorrectionVector&)>;

double channel_area(double x);

NozzleCase build_case(int s, Regime regime, SolverKind solver);

FlowState initial_state(const NozzleCase& c);

LinearSystem assemble_system(const NozzleCase& c, const FlowState& state);

// Full right-hand side b such that rhs = b - A*x for the state the system was
// assembled at (the delta-form identity of the linearised iteration).
Eigen::VectorXd full_rhs(const LinearSystem& sys, const FlowState& state);

CorrectionVector solve_linear(const LinearSystem& sys);

ConvergenceReport run_outer_loop(const NozzleCase& c, const Corrector& corrector = nullptr);

double subnormalisation_kappa(const Eigen::MatrixXd& A);

CorrectionVector identity_corrector(const CorrectionVector& v);

}  // namespace qlab
