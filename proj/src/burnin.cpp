#include "qlab/burnin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "qlab/rng.hpp"

namespace qlab {

bool SlopeModel::monotone_decreasing_on_unit() const {
    // derivative 2*c2*a + c1 < 0 on [0, 1]; linear in a, check the ends
    return c1 < 0.0 && 2.0 * c2 + c1 < 0.0;
}

DummyState make_dummy_state(int qubits, int n_peaks, double a_max, std::mt19937_64& rng) {
    if (qubits < 1) throw std::invalid_argument("make_dummy_state: qubits >= 1 required");
    long long dim = 1LL << qubits;
    if (n_peaks < 1 || n_peaks > dim)
        throw std::invalid_argument("make_dummy_state: n_peaks must be in [1, 2^D]");
    if (!(a_max > 0.0 && a_max < 1.0))
        throw std::invalid_argument("make_dummy_state: a_max in (0,1) required");

    DummyState st;
    st.qubits = qubits;
    st.n_peaks = n_peaks;
    st.a_max = a_max;
    double background = 1.0 / std::sqrt(static_cast<double>(dim));
    st.amplitudes.assign(dim, background);

    // peaks drawn uniformly without replacement
    std::vector<int> idx(dim);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < n_peaks; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(dim) - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    st.peak_positions.assign(idx.begin(), idx.begin() + n_peaks);
    std::sort(st.peak_positions.begin(), st.peak_positions.end());
    for (int pos : st.peak_positions) st.amplitudes[pos] = a_max;

    double norm = 0.0;
    for (double v : st.amplitudes) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : st.amplitudes) v /= norm;
    return st;
}

RatioSample sample_unique_ratio(const DummyState& state, long long n_samples,
                                std::mt19937_64& rng) {
    if (n_samples < 1) throw std::invalid_argument("sample_unique_ratio: n_samples >= 1");
    std::vector<double> probs(state.amplitudes.size());
    for (size_t i = 0; i < probs.size(); ++i) probs[i] = state.amplitudes[i] * state.amplitudes[i];
    std::discrete_distribution<int> draw(probs.begin(), probs.end());
    std::vector<char> seen(probs.size(), 0);
    long long unique = 0;
    for (long long t = 0; t < n_samples; ++t) {
        int outcome = draw(rng);
        if (!seen[outcome]) {
            seen[outcome] = 1;
            ++unique;
        }
    }
    RatioSample rs;
    rs.n_samples = n_samples;
    rs.n_new = unique;
    rs.r = static_cast<double>(unique) / static_cast<double>(n_samples);
    return rs;
}

double fit_slope(const std::vector<RatioSample>& samples) {
    std::set<long long> distinct;
    for (const auto& s : samples) distinct.insert(s.n_samples);
    if (distinct.size() < 2) throw std::invalid_argument("fit_slope: need >= 2 distinct N_S values");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        double x = std::log10(static_cast<double>(s.n_samples));
        sx += x;
        sy += s.r;
        sxx += x * x;
        sxy += x * s.r;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

AmaxEstimate a_max_from_slope(double slope, const SlopeModel& model) {
    AmaxEstimate est;
    double hi_val = model(0.0), lo_val = model(1.0);  // decreasing model
    if (slope >= hi_val) {
        est.a_max = 0.0;
        est.clamped = (slope > hi_val);
        return est;
    }
    if (slope <= lo_val) {
        est.a_max = 1.0;
        est.clamped = (slope < lo_val);
        return est;
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (model(mid) > slope)
            lo = mid;
        else
            hi = mid;
    }
    est.a_max = 0.5 * (lo + hi);
    return est;
}

long long burn_in_shots(double alpha, double a_max) {
    if (alpha * a_max <= 0.0) throw std::invalid_argument("burn_in_shots: alpha * a_max must be > 0");
    double x = alpha * a_max;
    return static_cast<long long>(std::ceil(1.0 / (x * x)));
}

SlopeModelBuild rebuild_slope_model(const BurninGrid& grid, int trials, uint64_t seed,
                                    int threads) {
    if (grid.depths.empty() || grid.a_max_values.empty() || grid.n_shots.size() < 2 || trials < 1)
        throw std::invalid_argument("rebuild_slope_model: empty grid");
    std::set<double> distinct_a(grid.a_max_values.begin(), grid.a_max_values.end());
    if (distinct_a.size() < 3)
        throw std::invalid_argument("rebuild_slope_model: quadratic fit needs >= 3 distinct a_max");

    struct Cell {
        int depth, n_peaks;
        double a_max;
        size_t ai;
    };
    std::vector<Cell> cells;
    for (int D : grid.depths)
        for (int np = 1; np <= (1 << (D - 1)); np *= 2)
            for (size_t ai = 0; ai < grid.a_max_values.size(); ++ai)
                cells.push_back({D, np, grid.a_max_values[ai], ai});

    std::vector<SlopeTableRow> table(cells.size());
    auto run_cell = [&](size_t ci) {
        const Cell& cell = cells[ci];
        double slope_sum = 0.0;
        for (int t = 0; t < trials; ++t) {
            auto rng = substream(seed, "burnin", static_cast<uint64_t>(cell.depth),
                                 static_cast<uint64_t>(cell.n_peaks), cell.ai,
                                 static_cast<uint64_t>(t));
            DummyState st = make_dummy_state(cell.depth, cell.n_peaks, cell.a_max, rng);
            std::vector<RatioSample> samples;
            samples.reserve(grid.n_shots.size());
            for (long long ns : grid.n_shots) samples.push_back(sample_unique_ratio(st, ns, rng));
            slope_sum += fit_slope(samples);
        }
        table[ci] = {cell.depth, cell.n_peaks, cell.a_max, slope_sum / trials};
    };

    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        for (size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back([&, w]() {
                for (size_t ci = w; ci < cells.size(); ci += nthreads) run_cell(ci);
            });
        for (auto& th : pool) th.join();
    }

    // unweighted mean over (D, N_peaks) cases per a_max, then quadratic fit
    std::vector<double> mean_slope(grid.a_max_values.size(), 0.0);
    std::vector<int> counts(grid.a_max_values.size(), 0);
    for (size_t ci = 0; ci < cells.size(); ++ci) {
        mean_slope[cells[ci].ai] += table[ci].slope;
        counts[cells[ci].ai] += 1;
    }
    Eigen::MatrixXd X(grid.a_max_values.size(), 3);
    Eigen::VectorXd y(grid.a_max_values.size());
    for (size_t ai = 0; ai < grid.a_max_values.size(); ++ai) {
        double a = grid.a_max_values[ai];
        X(ai, 0) = a * a;
        X(ai, 1) = a;
        X(ai, 2) = 1.0;
        y(ai) = mean_slope[ai] / counts[ai];
    }
    Eigen::Vector3d coef = (X.transpose() * X).ldlt().solve(X.transpose() * y);

    SlopeModelBuild out;
    out.model.c2 = coef(0);
    out.model.c1 = coef(1);
    out.model.c0 = coef(2);
    out.table = std::move(table);
    return out;
}

}  // namespace qlab
