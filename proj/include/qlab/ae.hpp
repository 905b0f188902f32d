#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace qlab {

// Chebyshev coin: a measurement of the degree-k polynomial circuit succeeds
// with probability T_k(a)^2. The shifted flavour interleaves the amplitude
// with a constant b so the sign of a becomes observable.
struct CoinOracle {
    enum class Flavour { plain, shifted };
    double a = 0.0;   // true amplitude in [-1, 1]
    Flavour flavour = Flavour::plain;
    double b = 0.5;   // shift used by the shifted flavour
    bool exact = false;  // infinite-shot limit: probabilities used directly
};

struct AeConfig {
    double eps = 1e-3;      // target accuracy on the amplitude
    double delta = 0.05;    // allowed failure probability
    double b0 = 0.5;        // initial shift for signed estimation
    long long degree_cap = 100000;
    int shots_per_round = 18;
    double margin = 0.1;    // keeps k * interval width below pi * (1 - margin)
};

struct AeResult {
    double a_hat = 0.0;
    long long coin_flips = 0;
    long long queries = 0;  // Q_Pi: sum over rounds of shots * degree
    int rounds = 0;
    bool converged = false;
    std::vector<double> shift_history;
    bool shift_clamped = false;
};

struct GateCost {
    double non_clifford = 0.0;
    double toffoli_extra = 0.0;
    double rotations = 0.0;
    double qubits = 0.0;
};

double chebyshev_coin_prob(double a, long long k);

long long chebyshev_coin(double a, long long k, long long shots, std::mt19937_64& rng);

// Unsigned |a| estimate. If `trace` is given, the confidence interval
// [lo, hi] on the amplitude is appended after every round.
AeResult chebae_estimate(const CoinOracle& oracle, const AeConfig& cfg, std::mt19937_64& rng,
                         std::vector<std::pair<double, double>>* trace = nullptr);

AeResult signed_estimate(const CoinOracle& oracle, const AeConfig& cfg, std::mt19937_64& rng);

// Query-count models for one amplitude at accuracy eps. Constants are the
// a = 0.5 fits; outside [1e-6, 1e-1] the value is extrapolated and
// *out_of_range is set when provided.
double model_query_complexity(double eps, bool signed_variant, bool* out_of_range = nullptr);

struct BlockEncodingCost {
    double m_c = 0.0;   // non-Clifford cost per block-encoding application
    double m_qb = 0.0;  // qubit cost per application
};

GateCost oracle_gate_cost(double d_poly, const BlockEncodingCost& be, double n_qubits);

}  // namespace qlab
