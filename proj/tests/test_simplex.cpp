#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "clam/simplex.hpp"

using namespace clam;

namespace {

Vec random_nonneg(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x(n);
    for (double &xi : x) xi = u(rng);
    if (*std::max_element(x.begin(), x.end()) == 0.0) x[0] = 0.5;
    return x;
}

double linf(const Vec &a, const Vec &b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("restricted simplex validation") {
    CHECK_NOTHROW(RestrictedSimplex(3, 0.1));
    CHECK_NOTHROW(RestrictedSimplex(3, 0.0));                // degenerate: full simplex
    CHECK_NOTHROW(RestrictedSimplex(4, 0.25));               // degenerate: single point
    CHECK_THROWS_AS(RestrictedSimplex(1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(RestrictedSimplex(3, -0.01), std::invalid_argument);
    CHECK_THROWS_AS(RestrictedSimplex(3, 0.4), std::invalid_argument);  // n*u_min > 1

    RestrictedSimplex s(3, 0.1);
    CHECK(s.contains({0.5, 0.3, 0.2}));
    CHECK_FALSE(s.contains({0.85, 0.1, 0.05}));  // below the bound
    CHECK_FALSE(s.contains({0.5, 0.3, 0.3}));    // sum != 1
}

TEST_CASE("proof-clip projection matches the hand-evaluated clip/renormalize") {
    RestrictedSimplex s(3, 0.15);
    const Vec out = project({0.7, 0.2, 0.1}, s, Projection::ProofClip);
    CHECK(out[0] == doctest::Approx(0.7 / 1.05).epsilon(1e-9));
    CHECK(out[1] == doctest::Approx(0.2 / 1.05).epsilon(1e-9));
    CHECK(out[2] == doctest::Approx(0.15 / 1.05).epsilon(1e-9));
    // The documented single-pass infeasibility witness: the clipped component
    // falls back below u_min after renormalizing.
    CHECK(out[2] < 0.15);
    CHECK_FALSE(s.contains(out));
}

TEST_CASE("scaled-clip projection solves the piecewise-linear equation") {
    RestrictedSimplex s(3, 0.15);
    const Vec out = project({0.7, 0.2, 0.1}, s, Projection::ScaledClip);
    const double c = 0.85 / 0.9;
    CHECK(out[0] == doctest::Approx(c * 0.7).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(c * 0.2).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(s.contains(out));
}

TEST_CASE("euclidean projection matches the hand-evaluated water filling") {
    RestrictedSimplex s(3, 0.15);
    const Vec out = project({0.7, 0.2, 0.1}, s, Projection::Euclidean);
    CHECK(out[0] == doctest::Approx(0.675).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.175).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("euclidean projection agrees with a grid search on the simplex") {
    std::mt19937_64 rng(7);
    RestrictedSimplex s(3, 0.08);
    for (int trial = 0; trial < 20; ++trial) {
        Vec x = random_nonneg(rng, 3);
        const double sum = std::accumulate(x.begin(), x.end(), 0.0);
        Vec xhat(3);
        for (std::size_t i = 0; i < 3; ++i) xhat[i] = x[i] / sum;
        const Vec out = project(x, s, Projection::Euclidean);

        double best = 1e30;
        for (double w1 = s.u_min; w1 <= 1.0; w1 += 1e-3)
            for (double w2 = s.u_min; w1 + w2 <= 1.0 - s.u_min + 1e-12; w2 += 1e-3) {
                const double w3 = 1.0 - w1 - w2;
                if (w3 < s.u_min - 1e-12) continue;
                const double d = (w1 - xhat[0]) * (w1 - xhat[0]) +
                                 (w2 - xhat[1]) * (w2 - xhat[1]) +
                                 (w3 - xhat[2]) * (w3 - xhat[2]);
                best = std::min(best, d);
            }
        double got = 0.0;
        for (std::size_t i = 0; i < 3; ++i) got += (out[i] - xhat[i]) * (out[i] - xhat[i]);
        CHECK(got <= best + 5e-6);
    }
}

TEST_CASE("projection identity on feasible points, all methods") {
    RestrictedSimplex s(3, 0.1);
    const Vec x = {0.5, 0.3, 0.2};
    for (Projection p : {Projection::ProofClip, Projection::ScaledClip, Projection::Euclidean}) {
        const Vec out = project(x, s, p);
        CHECK(out == x);  // bitwise
    }
}

TEST_CASE("projection feasibility and idempotence on random inputs") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::size_t> pick_n(2, 200);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = pick_n(rng);
        const double u_min =
            std::uniform_real_distribution<double>(0.0, 1.0 / static_cast<double>(n))(rng);
        RestrictedSimplex s(n, u_min);
        const Vec x = random_nonneg(rng, n);

        for (Projection p : {Projection::ScaledClip, Projection::Euclidean}) {
            const Vec out = project(x, s, p);
            double sum = 0.0;
            for (double o : out) {
                CHECK(o >= u_min - 1e-12);
                sum += o;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(linf(project(out, s, p), out) <= 1e-12);
        }

        // ProofClip is single-pass: idempotence only holds when the first
        // output happens to stay feasible (no clipping, or mild inputs).
        const Vec out = project(x, s, Projection::ProofClip);
        if (s.contains(out)) CHECK(linf(project(out, s, Projection::ProofClip), out) <= 1e-12);
    }
}

TEST_CASE("projection input validation") {
    RestrictedSimplex s(3, 0.1);
    CHECK_THROWS_AS(project({}, s, Projection::ProofClip), std::invalid_argument);
    CHECK_THROWS_AS(project({0.5, -0.1, 0.6}, s, Projection::ProofClip), std::invalid_argument);
    CHECK_THROWS_AS(project({0.0, 0.0, 0.0}, s, Projection::ProofClip), std::invalid_argument);
    CHECK_THROWS_AS(project({0.5, 0.5}, s, Projection::ProofClip), std::invalid_argument);
}

TEST_CASE("mw_update examples") {
    RestrictedSimplex s(2, 0.1);
    MWConfig cfg{std::log(2.0), Projection::ProofClip};
    const Vec out = mw_update({0.5, 0.5}, {1.0, 0.0}, cfg, s);
    CHECK(out[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // Uniform payoff cancels in the normalization.
    for (double c : {0.0, 0.3, 1.0}) {
        const Vec same = mw_update({0.5, 0.5}, {c, c}, cfg, s);
        CHECK(same[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(same[1] == doctest::Approx(0.5).epsilon(1e-12));
    }

    // tau = 0 freezes the weights bitwise.
    MWConfig frozen{0.0, Projection::ScaledClip};
    const Vec w = {0.4, 0.6};
    CHECK(mw_update(w, {0.9, 0.1}, frozen, s) == w);

    CHECK_THROWS_AS(mw_update({0.5, 0.5}, {1.0, 0.0, 0.0}, cfg, s), std::invalid_argument);
}

TEST_CASE("mw_update with u_min 0 and proof-clip is the plain hedge update") {
    std::mt19937_64 rng(3);
    RestrictedSimplex degenerate(4, 0.0);
    MWConfig cfg{0.7, Projection::ProofClip};
    for (int trial = 0; trial < 50; ++trial) {
        Vec w = random_nonneg(rng, 4);
        double sum = std::accumulate(w.begin(), w.end(), 0.0);
        for (double &wi : w) wi /= sum;
        const Vec v = random_nonneg(rng, 4);

        Vec expected(4);
        double z = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            expected[i] = w[i] * std::exp(-cfg.tau * v[i]);
            z += expected[i];
        }
        for (double &e : expected) e /= z;

        CHECK(linf(mw_update(w, v, cfg, degenerate), expected) <= 1e-12);
    }
}

TEST_CASE("mw_update preserves the payoff order of the weights") {
    std::mt19937_64 rng(11);
    RestrictedSimplex s(6, 0.05);
    MWConfig cfg{1.0, Projection::ScaledClip};
    for (int trial = 0; trial < 200; ++trial) {
        Vec w = random_nonneg(rng, 6);
        double sum = std::accumulate(w.begin(), w.end(), 0.0);
        for (double &wi : w) wi /= sum;
        w = project(w, s, Projection::ScaledClip);
        const Vec v = random_nonneg(rng, 6);
        const Vec out = mw_update(w, v, cfg, s);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) {
                if (v[i] >= v[j]) continue;
                // Unclipped components keep the multiplicative ordering.
                if (out[i] > s.u_min + 1e-12 && out[j] > s.u_min + 1e-12)
                    CHECK(out[i] / w[i] >= out[j] / w[j] - 1e-12);
            }
    }
}

TEST_CASE("weighted_value examples") {
    CHECK(weighted_value({0.2, 0.8}, {0.5, 0.75}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(weighted_value(uniform_weights(4), {0.1, 0.2, 0.3, 0.4}) ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK(weighted_value({0.0, 1.0, 0.0}, {0.3, 0.9, 0.5}) == doctest::Approx(0.9));
    CHECK_THROWS_AS(weighted_value({0.5, 0.5}, {1.0}), std::invalid_argument);
}

TEST_CASE("min_linear_over_simplex closed form and brute-force agreement") {
    RestrictedSimplex s(3, 0.1);
    auto [w, f] = min_linear_over_simplex({0.9, 0.5, 0.7}, s);
    CHECK(w[0] == doctest::Approx(0.1));
    CHECK(w[1] == doctest::Approx(0.8));
    CHECK(w[2] == doctest::Approx(0.1));
    CHECK(f == doctest::Approx(0.56).epsilon(1e-12));

    // Brute-force grid over the restricted 3-simplex.
    double best = 1e30;
    const Vec v = {0.9, 0.5, 0.7};
    for (double w1 = s.u_min; w1 <= 1.0; w1 += 1e-3)
        for (double w2 = s.u_min; w1 + w2 <= 1.0 - s.u_min + 1e-12; w2 += 1e-3) {
            const double w3 = 1.0 - w1 - w2;
            if (w3 < s.u_min - 1e-12) continue;
            best = std::min(best, w1 * v[0] + w2 * v[1] + w3 * v[2]);
        }
    CHECK(f == doctest::Approx(best).epsilon(2e-3));

    // Single-point simplex: the uniform vector, value = mean.
    RestrictedSimplex point(4, 0.25);
    auto [wu, fu] = min_linear_over_simplex({0.1, 0.9, 0.5, 0.5}, point);
    for (double wi : wu) CHECK(wi == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fu == doctest::Approx(0.5).epsilon(1e-12));

    // Constant payoff: every feasible w gives the same value.
    auto [wc, fc] = min_linear_over_simplex({0.3, 0.3, 0.3}, s);
    (void)wc;
    CHECK(fc == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("min_linear value is monotone, Schur-concave, and symmetric") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
        const double u_min = unit(rng) / static_cast<double>(n);
        RestrictedSimplex s(n, u_min);
        Vec v(n);
        for (double &vi : v) vi = unit(rng);
        const double f = min_linear_over_simplex(v, s).second;

        // Monotonic under componentwise increase.
        Vec vp = v;
        for (double &vi : vp) vi += unit(rng) * 0.2;
        CHECK(min_linear_over_simplex(vp, s).second >= f - 1e-9);

        // Schur-concave: a mean-preserving squeeze does not decrease f.
        std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        std::size_t j = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        if (v[i] < v[j]) std::swap(i, j);
        if (v[i] > v[j]) {
            const double eps = unit(rng) * (v[i] - v[j]);
            Vec vs = v;
            vs[i] -= eps;
            vs[j] += eps;
            CHECK(min_linear_over_simplex(vs, s).second >= f - 1e-9);
        }

        // Symmetric under permutations.
        Vec perm = v;
        std::shuffle(perm.begin(), perm.end(), rng);
        CHECK(min_linear_over_simplex(perm, s).second == doctest::Approx(f).epsilon(1e-9));
    }
}

TEST_CASE("ggf_value examples and permutation oracle") {
    GgfWeights g({0.5, 0.3, 0.2});
    CHECK(ggf_value(g, {3.0, 1.0, 2.0}) == doctest::Approx(1.7).epsilon(1e-12));

    GgfWeights uniform(Vec(4, 0.25));
    CHECK(ggf_value(uniform, {0.1, 0.5, 0.9, 0.5}) == doctest::Approx(0.5).epsilon(1e-12));

    // Eq: sorted pairing equals the minimum over all permutations.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t n = 2; n <= 6; ++n) {
        Vec raw(n);
        for (double &x : raw) x = unit(rng) + 0.01;
        std::sort(raw.begin(), raw.end(), std::greater<>());
        double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
        for (double &x : raw) x /= sum;
        GgfWeights gw(raw);
        Vec u(n);
        for (double &x : u) x = unit(rng);

        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        double best = 1e30;
        do {
            double val = 0.0;
            for (std::size_t k = 0; k < n; ++k) val += gw.w[idx[k]] * u[k];
            best = std::min(best, val);
        } while (std::next_permutation(idx.begin(), idx.end()));
        CHECK(ggf_value(gw, u) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("ggf_value approaches the minimum as the weights concentrate") {
    const std::size_t n = 5;
    const double delta = 1e-6;
    Vec w(n, delta);
    w[0] = 1.0 - (n - 1) * delta;
    GgfWeights g(w);
    const Vec u = {0.9, 0.2, 0.7, 0.4, 0.6};
    const double range = 0.7;
    CHECK(std::abs(ggf_value(g, u) - 0.2) <= 1e-4 * range);
}

TEST_CASE("ggf weight validation") {
    CHECK_THROWS_AS(GgfWeights({0.2, 0.3, 0.5}), std::invalid_argument);  // increasing
    CHECK_THROWS_AS(GgfWeights({0.5, 0.3, 0.1}), std::invalid_argument);  // sum != 1
    CHECK_THROWS_AS(GgfWeights({1.5, -0.5}), std::invalid_argument);      // negative
    CHECK_THROWS_AS(ggf_value(GgfWeights({0.6, 0.4}), {1.0}), std::invalid_argument);
}
