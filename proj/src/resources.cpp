#include "qlab/resources.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "qlab/ae.hpp"

namespace qlab {

long long rotation_t_cost(double eps_rot, double c1, double c0) {
    if (!(eps_rot > 0.0 && eps_rot < 1.0))
        throw std::invalid_argument("rotation_t_cost: eps_rot in (0,1) required");
    return static_cast<long long>(std::ceil(c1 * std::log2(1.0 / eps_rot) + c0));
}

GateCounts total_gate_counts(const BlockEncodingSpec& be, const InversionSpec& inv, bool ae) {
    GateCounts g;
    double d = inv.d_poly;
    double rotations = ae ? (4.0 * d + 2.0) : d;
    double eps_rot = inv.rotation_fraction * inv.eps_inv / rotations;
    double t_per_rot = static_cast<double>(rotation_t_cost(eps_rot));
    if (ae) t_per_rot *= 2.0;  // controlled rotations cost twice an uncontrolled one
    double applications = ae ? 2.0 * d : d;
    g.rotations = rotations;
    g.t_gates = applications * be.t_per_pf + rotations * t_per_rot;
    g.toffoli_gates = applications * be.toffoli_per_pf + (ae ? 2.0 * be.n : 0.0);
    return g;
}

int code_distance(const ErrorCorrectionParams& params, double n_t_states, double n_qubits) {
    if (n_t_states < 1) throw std::invalid_argument("code_distance: N_T >= 1 required");
    double budget = params.p_fail_logical / (n_t_states * n_qubits);
    for (int d = 3; d <= 99; d += 2) {
        double per_round =
            params.fowler_prefactor * std::pow(params.p_phys / params.p_threshold, (d + 1) / 2.0);
        if (per_round <= budget) return d;
    }
    throw std::runtime_error("code_distance: no distance <= 99 satisfies the failure budget");
}

double physical_qubits(double n_logical, int d_code, const ErrorCorrectionParams& params) {
    if (n_logical < 1) throw std::invalid_argument("physical_qubits: n_logical >= 1 required");
    double tiles = 2.0 * n_logical + std::ceil(std::sqrt(8.0 * n_logical)) + 1.0;
    double dd = static_cast<double>(d_code);
    return tiles * (2.0 * dd * dd - 1.0) + params.factory.count * params.factory.footprint_qubits;
}

double oracle_time(double t_gates, double toffoli_gates, int d_code,
                   const ErrorCorrectionParams& params) {
    if (t_gates < 0 || toffoli_gates < 0) throw std::invalid_argument("oracle_time: counts >= 0");
    return (t_gates + params.toffoli_magic_factor * toffoli_gates) * d_code * params.t_cycle_s;
}

double oracle_calls(double eps, bool ae) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("oracle_calls: eps in (0,1)");
    if (ae) return model_query_complexity(eps, true);
    return std::ceil(1.0 / (eps * eps));
}

double percentage_of_amplitudes(double t_naive_total_s, double t_ae_total_s,
                                double n_amplitudes) {
    if (t_naive_total_s <= 0 || t_ae_total_s <= 0 || n_amplitudes <= 0)
        throw std::invalid_argument("percentage_of_amplitudes: positive inputs required");
    double pct = 100.0 * std::floor(t_naive_total_s / t_ae_total_s) / n_amplitudes;
    pct = std::min(100.0, pct);
    return std::round(pct * 100.0) / 100.0;
}

std::vector<TableFixtureRow> load_fixture_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_fixture_rows: cannot open " + path);
    nlohmann::json j;
    in >> j;
    double amps_per_station = j.value("amplitudes_per_station", 2.0);
    std::vector<TableFixtureRow> rows;
    for (const auto& r : j.at("rows")) {
        TableFixtureRow row;
        row.amplitude_estimation = r.at("amplitude_estimation").get<bool>();
        row.accuracy = r.at("accuracy").get<double>();
        row.stations = r.at("stations").get<int>();
        row.phase_factors = r.at("phase_factors").get<double>();
        row.kappa = r.at("kappa").get<double>();
        row.logical_qubits = r.at("logical_qubits").get<double>();
        row.physical_qubits = r.at("physical_qubits").get<double>();
        row.t_gates = r.at("t_gates").get<double>();
        row.toffoli_gates = r.at("toffoli_gates").get<double>();
        row.oracle_time_s = r.at("oracle_time_s").get<double>();
        row.oracle_calls = r.at("oracle_calls").get<double>();
        row.total_time_days = r.at("total_time_days").get<double>();
        if (r.contains("percentage_of_amplitudes") && !r.at("percentage_of_amplitudes").is_null())
            row.percentage_of_amplitudes = r.at("percentage_of_amplitudes").get<double>();
        row.amplitudes = amps_per_station * row.stations;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ResourceRow> build_table(const std::vector<TableFixtureRow>& fixtures,
                                     const ErrorCorrectionParams& params) {
    // pair up AE/naive fixture rows sharing (stations, accuracy)
    std::map<std::pair<int, double>, const TableFixtureRow*> naive_rows, ae_rows;
    for (const auto& f : fixtures) {
        auto key = std::make_pair(f.stations, f.accuracy);
        (f.amplitude_estimation ? ae_rows : naive_rows)[key] = &f;
    }

    std::vector<ResourceRow> out;
    out.reserve(fixtures.size());
    for (const auto& f : fixtures) {
        auto key = std::make_pair(f.stations, f.accuracy);
        auto naive_it = naive_rows.find(key);
        if (naive_it == naive_rows.end())
            throw std::runtime_error("build_table: AE fixture row without a naive partner");
        const TableFixtureRow& naive = *naive_it->second;

        ResourceRow row;
        row.amplitude_estimation = f.amplitude_estimation;
        row.accuracy = f.accuracy;
        row.stations = f.stations;
        row.phase_factors = f.phase_factors;
        row.kappa = f.kappa;
        row.logical_qubits = f.logical_qubits;
        row.t_gates = f.t_gates;
        // the AE circuit applies the block encoding twice per phase factor;
        // its Toffoli column is exactly double the naive one
        row.toffoli_gates = f.amplitude_estimation ? 2.0 * naive.toffoli_gates : f.toffoli_gates;
        double n_t = row.t_gates + params.toffoli_magic_factor * row.toffoli_gates;
        int d = code_distance(params, n_t, row.logical_qubits);
        row.code_distance = d;
        row.physical_qubits = physical_qubits(row.logical_qubits, d, params);
        row.oracle_time_s = oracle_time(row.t_gates, row.toffoli_gates, d, params);
        row.oracle_calls = oracle_calls(f.accuracy, f.amplitude_estimation);
        row.total_time_days = row.oracle_calls * row.oracle_time_s / 86400.0;
        if (!f.amplitude_estimation) {
            auto ae_it = ae_rows.find(key);
            if (ae_it != ae_rows.end()) {
                const TableFixtureRow& ae = *ae_it->second;
                // percentage column uses the published per-pair times
                row.percentage_of_amplitudes = percentage_of_amplitudes(
                    naive.oracle_calls * naive.oracle_time_s, ae.oracle_calls * ae.oracle_time_s,
                    f.amplitudes);
            }
        }
        out.push_back(row);
    }
    return out;
}

std::string table_csv(const std::vector<ResourceRow>& rows) {
    std::ostringstream os;
    os << "amplitude_estimation,accuracy,stations,phase_factors,kappa,logical_qubits,"
          "physical_qubits,t_gates,toffoli_gates,oracle_time_s,oracle_calls,total_time_days,"
          "percentage_of_amplitudes\n";
    os.precision(10);
    for (const auto& r : rows) {
        os << (r.amplitude_estimation ? "True" : "False") << ',' << r.accuracy << ','
           << r.stations << ',' << r.phase_factors << ',' << r.kappa << ',' << r.logical_qubits
           << ',' << r.physical_qubits << ',' << r.t_gates << ',' << r.toffoli_gates << ','
           << r.oracle_time_s << ',' << r.oracle_calls << ',' << r.total_time_days << ',';
        if (r.percentage_of_amplitudes)
            os << *r.percentage_of_amplitudes;
        else
            os << '-';
        os << '\n';
    }
    return os.str();
}

}  // namespace qlab
