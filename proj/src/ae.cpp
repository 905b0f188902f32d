#include "qlab/ae.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <stdexcept>

namespace qlab {

namespace {
constexpr double kBranch = M_PI / 2.0;  // width of one monotone branch of cos^2(k t)

std::pair<double, double> clopper_pearson(long long succ, long long n, double dr) {
    double lo = (succ == 0) ? 0.0
                            : boost::math::ibeta_inv(static_cast<double>(succ),
                                                     static_cast<double>(n - succ + 1), dr / 2.0);
    double hi = (succ == n) ? 1.0
                            : boost::math::ibeta_inv(static_cast<double>(succ + 1),
                                                     static_cast<double>(n - succ), 1.0 - dr / 2.0);
    return {lo, hi};
}
}  // namespace

double chebyshev_coin_prob(double a, long long k) {
    if (std::abs(a) > 1.0 || k < 1) throw std::invalid_argument("chebyshev_coin: |a|<=1, k>=1 required");
    double t = std::cos(static_cast<double>(k) * std::acos(a));
    return t * t;
}

long long chebyshev_coin(double a, long long k, long long shots, std::mt19937_64& rng) {
    double p = chebyshev_coin_prob(a, k);
    std::binomial_distribution<long long> coin(shots, p);
    return coin(rng);
}

namespace {

// Interval-refinement estimator for theta = arccos(amp), amp in [0, 1].
// Each round: largest odd degree whose cos^2 branch is single-valued on the
// current interval (capped near the end so the last rounds are not
// overshot), a batch of coin flips pooled with previous rounds at the same
// degree, then a Clopper-Pearson interval pushed through the branch inverse.
// Rounds early in the ladder get a tighter confidence than the final rounds:
// a silent slide of the interval early on is fatal and cheap to prevent,
// while the last rounds carry nearly all the query cost.
AeResult chebae_theta(double amp_true, const AeConfig& cfg, std::mt19937_64& rng,
                      double delta, bool exact,
                      std::vector<std::pair<double, double>>* trace) {
    AeResult res;
    if (exact) {
        res.a_hat = amp_true;
        res.converged = true;
        return res;
    }
    const double eps = cfg.eps;
    const int batch = cfg.shots_per_round;
    // two-tier per-round confidence, tuned at delta = 0.05
    const double dre = std::clamp(0.2 * delta, 1e-6, 0.2);
    const double drl = std::clamp(1.2 * delta, 1e-6, 0.24);
    const double guard = 0.4;
    const double stall_frac = 0.5;
    const double late_frac = 0.2;

    double theta = std::acos(std::clamp(amp_true, 0.0, 1.0));
    double tlo = 0.0, thi = kBranch;
    long long kprev = 0, pool_succ = 0, pool_n = 0;
    const double w_exp = std::sqrt(std::log(2.0 / drl) / (2.0 * batch));
    const int round_cap = 2000;

    while (std::cos(tlo) - std::cos(thi) > 2.0 * eps) {
        if (res.rounds >= round_cap) break;
        ++res.rounds;
        double width = thi - tlo;
        double need = 2.0 * eps / std::max(std::sin(tlo + 0.5 * width), 1e-9);
        double kneed = 2.0 * w_exp / (0.6 * need);
        long long kmax = static_cast<long long>(M_PI * (1.0 - cfg.margin) / std::max(width, 1e-18));
        kmax = std::min<long long>(kmax, cfg.degree_cap);
        long long k = 1;
        for (long long kk = 3; kk <= kmax; kk += 2) {
            if (static_cast<double>(kk) > kneed + 2.0 && k > 1) break;
            long long blo = static_cast<long long>(std::floor(kk * tlo / kBranch + 1e-12));
            long long bhi = static_cast<long long>(std::floor(kk * thi / kBranch - 1e-12));
            if (blo == bhi) k = kk;
        }
        double drr = (static_cast<double>(k) >= late_frac * kneed) ? drl : dre;
        long long shots;
        if (k != kprev) {
            pool_succ = 0;
            pool_n = 0;
            shots = batch;
        } else {
            shots = std::max<long long>(2, static_cast<long long>(std::ceil(stall_frac * pool_n)));
        }
        kprev = k;
        pool_succ += chebyshev_coin(std::cos(theta), k, shots, rng);
        pool_n += shots;
        res.coin_flips += shots;
        res.queries += shots * k;

        long long m = static_cast<long long>(std::floor(k * tlo / kBranch + 1e-12));
        double base = static_cast<double>(m) * kBranch;
        auto [plo, phi] = clopper_pearson(pool_succ, pool_n, drr);
        auto theta_of_p = [&](double pv) {
            pv = std::clamp(pv, 0.0, 1.0);
            double x = std::acos(std::sqrt(pv));
            double t = (m % 2 == 0) ? (base + x) : (base + (kBranch - x));
            return t / static_cast<double>(k);
        };
        double t1 = theta_of_p(phi), t2 = theta_of_p(plo);
        double nlo = std::min(t1, t2), nhi = std::max(t1, t2);
        double il = std::max(tlo, nlo), ih = std::min(thi, nhi);
        // Sliver recovery: an implausibly thin intersection of two
        // comparable intervals usually means an earlier round slid the
        // interval off the true value. Fall back to the union and restart
        // the shot pool.
        if (il > ih || ((ih - il) < guard * (nhi - nlo) && (nhi - nlo) < 0.9 * width)) {
            il = std::max(0.0, std::min(tlo, nlo));
            ih = std::min(kBranch, std::max(thi, nhi));
            kprev = 0;
            pool_succ = 0;
            pool_n = 0;
        }
        tlo = il;
        thi = ih;
        if (trace) trace->emplace_back(std::cos(thi), std::cos(tlo));
    }
    res.a_hat = 0.5 * (std::cos(tlo) + std::cos(thi));
    res.converged = (std::cos(tlo) - std::cos(thi)) <= 2.0 * eps;
    return res;
}

}  // namespace

AeResult chebae_estimate(const CoinOracle& oracle, const AeConfig& cfg, std::mt19937_64& rng,
                         std::vector<std::pair<double, double>>* trace) {
    if (oracle.flavour != CoinOracle::Flavour::plain)
        throw std::invalid_argument("chebae_estimate: plain coin oracle required");
    return chebae_theta(std::abs(oracle.a), cfg, rng, cfg.delta, oracle.exact, trace);
}

AeResult signed_estimate(const CoinOracle& oracle, const AeConfig& cfg, std::mt19937_64& rng) {
    if (oracle.flavour != CoinOracle::Flavour::shifted)
        throw std::invalid_argument("signed_estimate: shifted coin oracle required");
    double b = std::abs(oracle.b);
    if (b <= 0.0 || b >= 1.0) throw std::invalid_argument("signed_estimate: shift b in (0,1) required");
    AeResult res;
    res.shift_history.push_back(b);
    // The two shifted sub-circuits carry amplitudes (a +- b)/2; estimating
    // each to eps*b/2 pins a = (c_plus^2 - c_minus^2)/b to eps (the estimate
    // of |a+b|/2 plus |a-b|/2 can never exceed 1/2, which absorbs the
    // doubled-accuracy budget of the two-sided difference).
    AeConfig sub = cfg;
    sub.eps = cfg.eps * b / 2.0;
    double c_plus = std::abs(oracle.a + b) / 2.0;
    double c_minus = std::abs(oracle.a - b) / 2.0;
    AeResult rp = chebae_theta(c_plus, sub, rng, cfg.delta / 2.0, oracle.exact, nullptr);
    AeResult rm = chebae_theta(c_minus, sub, rng, cfg.delta / 2.0, oracle.exact, nullptr);
    res.a_hat = (rp.a_hat * rp.a_hat - rm.a_hat * rm.a_hat) / b;
    res.coin_flips = rp.coin_flips + rm.coin_flips;
    res.queries = rp.queries + rm.queries;
    res.rounds = rp.rounds + rm.rounds;
    res.converged = rp.converged && rm.converged;
    // next shift: negative of the lower bound of the current estimate
    double next = -(res.a_hat - cfg.eps);
    if (std::abs(next) >= 1.0 || next == 0.0) {
        res.shift_clamped = true;
        next = std::clamp(next, -0.99, 0.99);
        if (next == 0.0) next = 0.5;
    }
    res.shift_history.push_back(next);
    return res;
}

double model_query_complexity(double eps, bool signed_variant, bool* out_of_range) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("model_query_complexity: eps in (0,1)");
    if (out_of_range) *out_of_range = (eps < 1e-6 || eps > 1e-1);
    if (signed_variant) return (1.71 / (2.0 * eps)) * std::log(2.08 * std::log(1.0 / (2.0 * eps)));
    return (1.71 / eps) * std::log(2.18 * std::log(1.0 / eps));
}

GateCost oracle_gate_cost(double d_poly, const BlockEncodingCost& be, double n_qubits) {
    if (d_poly < 1.0) throw std::invalid_argument("oracle_gate_cost: d_poly >= 1 required");
    GateCost g;
    g.non_clifford = 2.0 * d_poly * be.m_c;
    g.toffoli_extra = 2.0 * n_qubits;
    g.rotations = 4.0 * d_poly + 2.0;
    g.qubits = be.m_qb + 2.0;
    return g;
}

}  // namespace qlab
