#include "qlab/noise.hpp"

#include <cmath>
#include <thread>

#include "qlab/rng.hpp"

namespace qlab {

CorrectionVector apply_gaussian_noise(const CorrectionVector& v, const NoiseSpec& spec,
                                      std::mt19937_64& rng) {
    CorrectionVector out = v;
    if (spec.eps_meas == 0.0) return out;
    double sigma = spec.scale_is_variance ? std::sqrt(spec.eps_meas) : spec.eps_meas;
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Eigen::Index i = 0; i < out.values.size(); ++i) out.values[i] += gauss(rng);
    double n = out.values.norm();
    out.normalised = (n > 0.0) ? Eigen::VectorXd(out.values / n) : out.values;
    return out;
}

CorrectionVector apply_cutoff(const CorrectionVector& v, double alpha) {
    CorrectionVector out = v;
    double amax = out.values.cwiseAbs().maxCoeff();
    if (amax == 0.0) return out;
    for (Eigen::Index i = 0; i < out.values.size(); ++i) {
        // strict inequality: components exactly at the threshold are dropped
        if (!(std::abs(out.values[i]) > alpha * amax)) out.values[i] = 0.0;
    }
    double n = out.values.norm();
    out.normalised = (n > 0.0) ? Eigen::VectorXd(out.values / n) : out.values;
    return out;
}

Corrector make_noisy_corrector(const NoiseSpec& spec, std::mt19937_64& rng) {
    NoiseSpec sp = spec;
    std::mt19937_64* r = &rng;
    return [sp, r](const CorrectionVector& cv) -> CorrectionVector {
        // the measured correction carries an absolute per-component error of
        // scale eps_meas: the noise floor does not shrink as the solver
        // converges, which is what makes eps_meas > eps_tol interesting
        CorrectionVector out = apply_gaussian_noise(cv, sp, *r);
        if (sp.alpha > 0.0) out = apply_cutoff(out, sp.alpha);
        return out;
    };
}

SweepResult run_noisy_sweep(const NozzleCase& c, const std::vector<double>& eps_list,
                            const std::vector<double>& alpha_list, int trials, uint64_t seed,
                            int iteration_cap, int threads) {
    if (eps_list.empty() || alpha_list.empty() || trials < 1)
        throw InvalidCase("run_noisy_sweep: empty grid");

    NozzleCase base = c;
    base.max_outer_iterations = iteration_cap;

    SweepResult result;
    result.cells.resize(eps_list.size() * alpha_list.size() * static_cast<size_t>(trials));
    auto run_cell = [&](size_t ei, size_t ai, int t) {
        size_t idx = (ei * alpha_list.size() + ai) * trials + t;
        NoiseSpec spec;
        spec.eps_meas = eps_list[ei];
        spec.alpha = alpha_list[ai];
        spec.iteration_cap = iteration_cap;
        auto rng = substream(seed, "sweep", ei, ai, static_cast<uint64_t>(t));
        NozzleCase cc = base;
        ConvergenceReport rep = run_outer_loop(cc, make_noisy_corrector(spec, rng));
        SweepCell& cell = result.cells[idx];
        cell.eps = eps_list[ei];
        cell.alpha = alpha_list[ai];
        cell.trial = t;
        // the recorded error is the largest component of the last correction
        // the loop saw, whether it stopped on tolerance or on the cap
        cell.max_error = rep.final_max_correction;
        cell.converged = rep.converged;
        cell.iterations = rep.iterations;
    };

    size_t ncells = result.cells.size();
    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        for (size_t ei = 0; ei < eps_list.size(); ++ei)
            for (size_t ai = 0; ai < alpha_list.size(); ++ai)
                for (int t = 0; t < trials; ++t) run_cell(ei, ai, t);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w) {
            pool.emplace_back([&, w]() {
                for (size_t flat = w; flat < ncells; flat += nthreads) {
                    int t = static_cast<int>(flat % trials);
                    size_t rest = flat / trials;
                    size_t ai = rest % alpha_list.size();
                    size_t ei = rest / alpha_list.size();
                    run_cell(ei, ai, t);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return result;
}

}  // namespace qlab
