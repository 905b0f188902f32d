#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qlab {

struct DummyState {
    int qubits = 3;
    int n_peaks = 1;
    double a_max = 0.5;                // pre-normalisation peak amplitude
    std::vector<int> peak_positions;   // sorted, unique
    std::vector<double> amplitudes;    // length 2^qubits, unit L2 norm
};

struct RatioSample {
    long long n_samples = 0;
    long long n_new = 0;  // unique outcomes seen
    double r = 0.0;       // n_new / n_samples
};

struct SlopeModel {
    double c2 = 0.0, c1 = 0.0, c0 = 0.0;  // slope(a_max) = c2 a^2 + c1 a + c0

    double operator()(double a) const { return (c2 * a + c1) * a + c0; }
    bool monotone_decreasing_on_unit() const;
};

struct AmaxEstimate {
    double a_max = 0.0;
    bool clamped = false;
};

struct BurninGrid {
    std::vector<int> depths = {3, 4, 5, 6};
    std::vector<double> a_max_values = {0.25, 0.5, 0.75, 0.9, 0.99};
    std::vector<long long> n_shots = {10, 50, 100, 500, 1000, 5000, 10000, 50000, 100000};
    // peak counts per depth D are the powers of two up to 2^(D-1)
};

struct SlopeTableRow {
    int depth = 0;
    int n_peaks = 0;
    double a_max = 0.0;
    double slope = 0.0;
};

DummyState make_dummy_state(int qubits, int n_peaks, double a_max, std::mt19937_64& rng);

RatioSample sample_unique_ratio(const DummyState& state, long long n_samples, std::mt19937_64& rng);

// Least-squares slope of r against log10(N_S).
double fit_slope(const std::vector<RatioSample>& samples);

AmaxEstimate a_max_from_slope(double slope, const SlopeModel& model);

long long burn_in_shots(double alpha, double a_max);

struct SlopeModelBuild {
    SlopeModel model;
    std::vector<SlopeTableRow> table;  // per-case trial-averaged slopes
};

SlopeModelBuild rebuild_slope_model(const BurninGrid& grid, int trials, uint64_t seed,
                                    int threads = 1);

}  // namespace qlab
