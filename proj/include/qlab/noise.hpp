#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qlab/nozzle.hpp"

namespace qlab {

struct NoiseSpec {
    double eps_meas = 0.0;    // Gaussian scale (standard deviation by default)
    double alpha = 0.0;       // cutoff fraction in [0, 1)
    uint64_t seed = 0;
    int iteration_cap = 100000;
    bool scale_is_variance = false;  // opt-in: treat eps_meas as the variance
};

struct SweepCell {
    double eps = 0.0;
    double alpha = 0.0;
    int trial = 0;
    double max_error = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
};

CorrectionVector apply_gaussian_noise(const CorrectionVector& v, const NoiseSpec& spec,
                                      std::mt19937_64& rng);

CorrectionVector apply_cutoff(const CorrectionVector& v, double alpha);

// Corrector used by the sweeps: noise on the normalised copy, cutoff, then
// rescale by the original norm.
Corrector make_noisy_corrector(const NoiseSpec& spec, std::mt19937_64& rng);

SweepResult run_noisy_sweep(const NozzleCase& c, const std::vector<double>& eps_list,
                            const std::vector<double>& alpha_list, int trials, uint64_t seed,
                            int iteration_cap = 100000, int threads = 1);

}  // namespace qlab
