#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qlab/ae.hpp"
#include "qlab/rng.hpp"

using namespace qlab;

namespace {
// Chebyshev recurrence oracle, independent of the cosine form
double cheb_rec(double a, long long k) {
    double tm = 1.0, t = a;
    if (k == 0) return 1.0;
    for (long long i = 2; i <= k; ++i) {
        double next = 2.0 * a * t - tm;
        tm = t;
        t = next;
    }
    return t;
}
}  // namespace

TEST_CASE("chebyshev coin probabilities") {
    CHECK(chebyshev_coin_prob(0.5, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(chebyshev_coin_prob(0.5, 2) == doctest::Approx(0.25).epsilon(1e-12));
    double t5 = cheb_rec(0.8, 5);
    CHECK(chebyshev_coin_prob(0.8, 5) == doctest::Approx(t5 * t5).epsilon(1e-12));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double a = ua(rng);
        long long k = 1 + (rng() % 40);
        double p = chebyshev_coin_prob(a, k);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        double t = cheb_rec(a, k);
        CHECK(p == doctest::Approx(t * t).epsilon(1e-9));
    }
    CHECK_THROWS(chebyshev_coin_prob(1.5, 1));
}

TEST_CASE("coin sampling is deterministic per seed and unbiased at scale") {
    auto r1 = substream(3, "coin");
    auto r2 = substream(3, "coin");
    CHECK(chebyshev_coin(0.5, 3, 1000, r1) == chebyshev_coin(0.5, 3, 1000, r2));
    auto r3 = substream(9, "coin");
    long long succ = chebyshev_coin(0.5, 1, 200000, r3);
    double rate = static_cast<double>(succ) / 200000.0;
    CHECK(rate == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("query model values and monotonicity") {
    // independent high-precision evaluation in long double
    auto direct_unsigned = [](long double e) {
        return (1.71L / e) * std::log(2.18L * std::log(1.0L / e));
    };
    auto direct_signed = [](long double e) {
        return (1.71L / (2.0L * e)) * std::log(2.08L * std::log(1.0L / (2.0L * e)));
    };
    for (double e : {1e-2, 3e-3, 1e-3, 1e-4, 1e-5}) {
        double got = model_query_complexity(e, false);
        double want = static_cast<double>(direct_unsigned(e));
        CHECK(got == doctest::Approx(want).epsilon(1e-5));  // 5 significant figures
        double gs = model_query_complexity(e, true);
        CHECK(gs == doctest::Approx(static_cast<double>(direct_signed(e))).epsilon(1e-5));
    }
    CHECK(model_query_complexity(1e-3, false) == doctest::Approx(4638.0).epsilon(1e-3));
    CHECK(model_query_complexity(1e-3, true) == doctest::Approx(2188.0).epsilon(1e-3));
    CHECK(model_query_complexity(1e-5, false) == doctest::Approx(5.51e5).epsilon(1e-2));
    double prev = model_query_complexity(1e-1, false);
    for (double e = 5e-2; e > 1e-6; e *= 0.5) {
        double cur = model_query_complexity(e, false);
        CHECK(cur > prev);
        prev = cur;
    }
    bool oor = false;
    model_query_complexity(1e-3, false, &oor);
    CHECK_FALSE(oor);
    model_query_complexity(1e-7, false, &oor);
    CHECK(oor);
    CHECK_THROWS(model_query_complexity(0.0, false));
}

TEST_CASE("exact-coin limit recovers a exactly") {
    AeConfig cfg;
    cfg.eps = 1e-3;
    auto rng = substream(1, "x");
    for (double a : {0.3, -0.3, 0.7, -0.85, 0.05}) {
        CoinOracle oracle{a, CoinOracle::Flavour::shifted, 0.5, true};
        AeResult r = signed_estimate(oracle, cfg, rng);
        CHECK(std::abs(r.a_hat - a) < 1e-12);
        CHECK(r.converged);
    }
    CoinOracle plain{0.42, CoinOracle::Flavour::plain, 0.5, true};
    CHECK(std::abs(chebae_estimate(plain, cfg, rng).a_hat - 0.42) < 1e-12);
}

TEST_CASE("eq-14 algebra with exact probabilities") {
    // ((a+b)/2)^2 and ((a-b)/2)^2 recombine to a
    double a = 0.3, b = 0.5;
    double cp = (a + b) / 2.0, cm = (a - b) / 2.0;
    CHECK((cp * cp - cm * cm) / b == doctest::Approx(0.3).epsilon(1e-14));
    AeConfig cfg;
    auto rng = substream(1, "x");
    CoinOracle neg{-0.3, CoinOracle::Flavour::shifted, 0.5, true};
    CHECK(signed_estimate(neg, cfg, rng).a_hat == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("chebae coverage at the boundary amplitude") {
    AeConfig cfg;
    cfg.eps = 0.01;
    cfg.delta = 0.05;
    int good = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        auto rng = substream(21, "zero", static_cast<uint64_t>(t));
        CoinOracle oracle{0.0, CoinOracle::Flavour::plain};
        AeResult r = chebae_estimate(oracle, cfg, rng);
        if (r.a_hat >= 0.0 && r.a_hat <= 0.01) ++good;
    }
    CHECK(good >= 95);
}

TEST_CASE("chebae coverage and interval soundness at a=0.5") {
    AeConfig cfg;
    cfg.eps = 1e-2;
    cfg.delta = 0.05;
    const int trials = 200;
    int fails = 0;
    long long rounds_total = 0, rounds_containing = 0;
    for (int t = 0; t < trials; ++t) {
        auto rng = substream(33, "cov", static_cast<uint64_t>(t));
        CoinOracle oracle{0.5, CoinOracle::Flavour::plain};
        std::vector<std::pair<double, double>> trace;
        AeResult r = chebae_estimate(oracle, cfg, rng, &trace);
        CHECK(r.converged);
        CHECK(r.queries >= r.coin_flips);
        if (std::abs(r.a_hat - 0.5) > cfg.eps) ++fails;
        for (auto& [lo, hi] : trace) {
            ++rounds_total;
            if (lo - 1e-12 <= 0.5 && 0.5 <= hi + 1e-12) ++rounds_containing;
        }
    }
    // failure limit: delta + 3 binomial standard errors
    double limit = 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / trials);
    CHECK(static_cast<double>(fails) / trials <= limit);
    // the running interval holds the true value in nearly all rounds
    CHECK(static_cast<double>(rounds_containing) / rounds_total > 0.9);
}

TEST_CASE("coverage across the amplitude grid") {
    AeConfig cfg;
    cfg.eps = 1e-2;
    cfg.delta = 0.05;
    const int trials = 200;
    double limit = 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / trials);
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        int fails = 0;
        for (int t = 0; t < trials; ++t) {
            auto rng = substream(44, "grid", static_cast<uint64_t>(a * 1000), static_cast<uint64_t>(t));
            CoinOracle oracle{a, CoinOracle::Flavour::plain};
            AeResult r = chebae_estimate(oracle, cfg, rng);
            if (std::abs(r.a_hat - a) > cfg.eps) ++fails;
        }
        INFO("a=", a);
        CHECK(static_cast<double>(fails) / trials <= limit);
    }
}

TEST_CASE("signed estimation recovers sign and magnitude") {
    AeConfig cfg;
    cfg.eps = 1e-2;
    cfg.delta = 0.05;
    const int trials = 100;
    for (double a : {-0.4, 0.3, -0.7}) {
        int fails = 0, sign_ok = 0;
        for (int t = 0; t < trials; ++t) {
            auto rng = substream(55, "sgn", static_cast<uint64_t>((a + 1) * 1000),
                                 static_cast<uint64_t>(t));
            CoinOracle oracle{a, CoinOracle::Flavour::shifted, 0.5, false};
            AeResult r = signed_estimate(oracle, cfg, rng);
            if (std::abs(r.a_hat - a) > cfg.eps) ++fails;
            if ((r.a_hat < 0) == (a < 0)) ++sign_ok;
            CHECK(r.shift_history.size() == 2);
        }
        INFO("a=", a);
        CHECK(fails <= 10);
        CHECK(sign_ok >= 97);
    }
}

TEST_CASE("mean queries stay within the model budget at desk scale") {
    AeConfig cfg;
    cfg.eps = 1e-2;
    cfg.delta = 0.05;
    double sum = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        auto rng = substream(66, "q", static_cast<uint64_t>(t));
        CoinOracle oracle{0.5, CoinOracle::Flavour::plain};
        sum += static_cast<double>(chebae_estimate(oracle, cfg, rng).queries);
    }
    double ratio = (sum / trials) / model_query_complexity(cfg.eps, false);
    CHECK(ratio < 3.5);  // the pinned factor-3 bound is checked in the acceptance suite
}

TEST_CASE("oracle gate cost formula") {
    BlockEncodingCost zero{0.0, 10.0};
    GateCost g = oracle_gate_cost(1.0, zero, 0.0);
    CHECK(g.rotations == 6.0);
    CHECK(g.qubits == 12.0);
    CHECK(g.non_clifford == 0.0);
    CHECK(g.toffoli_extra == 0.0);

    BlockEncodingCost be{9.0, 30.0};
    GateCost big = oracle_gate_cost(8.83e4, be, 8.0);
    CHECK(big.rotations == doctest::Approx(4.0 * 8.83e4 + 2.0));
    CHECK(big.non_clifford == doctest::Approx(2.0 * 8.83e4 * 9.0));
    CHECK(big.toffoli_extra == 16.0);
    CHECK_THROWS(oracle_gate_cost(0.5, be, 8.0));
}

TEST_CASE("flavour preconditions") {
    AeConfig cfg;
    auto rng = substream(1, "f");
    CoinOracle shifted{0.5, CoinOracle::Flavour::shifted, 0.5, false};
    CHECK_THROWS(chebae_estimate(shifted, cfg, rng));
    CoinOracle plain{0.5, CoinOracle::Flavour::plain};
    CHECK_THROWS(signed_estimate(plain, cfg, rng));
}
