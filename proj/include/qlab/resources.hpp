#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qlab {

struct BlockEncodingSpec {
    std::string name;
    double n = 0;          // system qubits
    double n_logical = 0;  // algorithm + block-encoding ancilla
    double toffoli_per_pf = 0;  // Toffoli cost per phase factor (per application)
    double t_per_pf = 0;        // T cost per phase factor (per application)
    double kappa = 1.0;         // subnormalisation
    double m_qb = 0;            // qubit cost per application
};

struct InversionSpec {
    double d_poly = 1;       // phase-factor count
    double eps_inv = 1e-5;   // total inversion accuracy
    double poly_fraction = 0.9;      // of eps_inv spent on the polynomial
    double rotation_fraction = 0.1;  // of eps_inv spent on rotation synthesis
};

struct FactorySpec {
    std::string name = "(15-to-1)^4_9,3,3 x (20-to-4)_15,7,9";
    double footprint_qubits = 36000;  // physical qubits per factory
    double output_period_cycles = 29; // cycles per magic state per factory
    int count = 1;
};

struct ErrorCorrectionParams {
    double p_phys = 1e-4;
    double p_threshold = 0.01;
    double fowler_prefactor = 0.1;
    double p_fail_logical = 0.009;
    double p_fail_msd = 0.001;
    double t_cycle_s = 1e-6;
    double toffoli_magic_factor = 2.0;  // magic consumptions per Toffoli
    FactorySpec factory;
    double rot_c1 = 3.02;  // T-count per halving of rotation accuracy
    double rot_c0 = 1.77;
};

struct GateCounts {
    double t_gates = 0;
    double toffoli_gates = 0;
    double rotations = 0;
};

struct ResourceRow {
    bool amplitude_estimation = false;
    double accuracy = 0;
    int stations = 0;
    double phase_factors = 0;
    double kappa = 0;
    double logical_qubits = 0;
    double physical_qubits = 0;
    double t_gates = 0;
    double toffoli_gates = 0;
    double code_distance = 0;
    double oracle_time_s = 0;
    double oracle_calls = 0;
    double total_time_days = 0;
    std::optional<double> percentage_of_amplitudes;  // naive rows only
};

// One transcribed published-table row: the model inputs plus the published
// output columns kept verbatim for cross-checking.
struct TableFixtureRow {
    bool amplitude_estimation = false;
    double accuracy = 0;
    int stations = 0;
    double phase_factors = 0;
    double kappa = 0;
    double logical_qubits = 0;
    double physical_qubits = 0;
    double t_gates = 0;
    double toffoli_gates = 0;
    double oracle_time_s = 0;
    double oracle_calls = 0;
    double total_time_days = 0;
    std::optional<double> percentage_of_amplitudes;
    // state dimension of the encoded system (stations times the per-station
    // amplitude count, which differs between discretisations)
    double amplitudes = 0;
};

long long rotation_t_cost(double eps_rot, double c1 = 3.02, double c0 = 1.77);

GateCounts total_gate_counts(const BlockEncodingSpec& be, const InversionSpec& inv, bool ae);

int code_distance(const ErrorCorrectionParams& params, double n_t_states, double n_qubits);

double physical_qubits(double n_logical, int d_code, const ErrorCorrectionParams& params);

double oracle_time(double t_gates, double toffoli_gates, int d_code,
                   const ErrorCorrectionParams& params);

double oracle_calls(double eps, bool ae);

double percentage_of_amplitudes(double t_naive_total_s, double t_ae_total_s, double n_amplitudes);

std::vector<TableFixtureRow> load_fixture_rows(const std::string& path);

std::vector<ResourceRow> build_table(const std::vector<TableFixtureRow>& fixtures,
                                     const ErrorCorrectionParams& params);

std::string table_csv(const std::vector<ResourceRow>& rows);

}  // namespace qlab
