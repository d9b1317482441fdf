#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "clam/losses.hpp"

using namespace clam;

TEST_CASE("cross entropy examples") {
    CHECK(ce_loss(1.0) == doctest::Approx(0.0));
    CHECK(ce_loss(0.5) == doctest::Approx(0.69315).epsilon(1e-4));
    CHECK(ce_loss(std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(ce_loss(0.0), std::domain_error);
    CHECK_THROWS_AS(ce_loss(-0.2), std::domain_error);
    // Inputs below the clamp floor are clamped, not rejected.
    CHECK(ce_loss(1e-300) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("focal loss examples and the ce bound") {
    CHECK(focal_loss(0.5, 2.0) == doctest::Approx(0.17329).epsilon(1e-4));
    CHECK(focal_loss(1.0, 2.0) == doctest::Approx(0.0));
    CHECK(focal_loss(0.37, 0.0) == ce_loss(0.37));  // bitwise at gamma = 0

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(1e-6, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double p = unit(rng);
        const double gamma = 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double fl = focal_loss(p, gamma);
        const double ce = ce_loss(p);
        CHECK(fl <= ce + 1e-15);
        if (gamma > 0.0 && p < 1.0) CHECK(fl < ce);
    }
    CHECK_THROWS_AS(focal_loss(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("performance-weighted loss examples") {
    CHECK(pw_loss(0.5, 2.0, 0.8) == doctest::Approx(0.72781).epsilon(1e-4));
    CHECK(pw_loss(1.0, 2.5, 0.8) == doctest::Approx(0.0));
    CHECK(pw_loss(0.42, 1.7, 0.0) == focal_loss(0.42, 1.7));

    // Strictly increasing in theta for p < 1.
    double prev = pw_loss(0.6, 2.0, 0.0);
    for (double theta = 0.2; theta <= 1.0; theta += 0.2) {
        const double cur = pw_loss(0.6, 2.0, theta);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("loss derivatives match central finite differences") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> pdist(0.05, 0.95);
    const LossSpec specs[] = {LossSpec::normal(), LossSpec::focal(2.0), LossSpec::focal(0.7),
                              LossSpec::pw(2.5, 0.8)};
    for (const LossSpec &spec : specs)
        for (int trial = 0; trial < 100; ++trial) {
            const double p = pdist(rng);
            const double h = 1e-6;
            const double num = (sample_loss(p + h, spec) - sample_loss(p - h, spec)) / (2 * h);
            const double ana = loss_derivative(p, spec);
            CHECK(ana == doctest::Approx(num).epsilon(1e-5));
        }
}

TEST_CASE("tce weight update") {
    const Vec out = tce_weights_update({0.5, 0.5}, {std::log(2.0), 0.0}, 0.5);
    CHECK(out[0] == doctest::Approx(0.58333).epsilon(1e-4));
    CHECK(out[1] == doctest::Approx(0.41667).epsilon(1e-4));

    // gamma = 0 leaves the weights bitwise unchanged.
    const Vec w = {0.3, 0.45, 0.25};
    CHECK(tce_weights_update(w, {1.0, 2.0, 0.5}, 0.0) == w);

    // gamma = 1 with equal losses snaps to uniform.
    const Vec u = tce_weights_update({0.7, 0.2, 0.1}, {0.4, 0.4, 0.4}, 1.0);
    for (double x : u) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // Output stays a probability vector; uniform weights with equal losses
    // are a fixed point.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 6;
        Vec prev(n);
        double s = 0.0;
        for (double &x : prev) s += (x = unit(rng) + 0.01);
        for (double &x : prev) x /= s;
        Vec losses(n);
        for (double &x : losses) x = 3.0 * unit(rng);
        const Vec next = tce_weights_update(prev, losses, unit(rng));
        double sum = 0.0;
        for (double x : next) {
            CHECK(x >= 0.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    const Vec fixed = tce_weights_update(Vec(4, 0.25), Vec(4, 1.3), 0.6);
    for (double x : fixed) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(tce_weights_update({0.5, 0.5}, {1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("ggf epoch weights") {
    const Vec out = ggf_epoch_weights({0.7, 0.5, 0.9}, 0.9, 0.1, 2, 1);
    CHECK(out[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(0.81).epsilon(1e-12));

    // alpha -> 1 gives all-ones weights.
    for (double x : ggf_epoch_weights({0.7, 0.5, 0.9}, 1.0, 0.1, 2, 1)) CHECK(x == 1.0);

    // Tied accuracies break by class index: 1, alpha, alpha^2, ...
    const Vec tied = ggf_epoch_weights(Vec(4, 0.5), 0.8, 0.0, 4, 1);
    CHECK(tied[0] == doctest::Approx(1.0));
    CHECK(tied[1] == doctest::Approx(0.8));
    CHECK(tied[2] == doctest::Approx(0.64));
    CHECK(tied[3] == doctest::Approx(0.512));

    // Off-frequency epochs use the standard loss (all-ones).
    for (double x : ggf_epoch_weights({0.7, 0.5, 0.9}, 0.9, 0.1, 3, 2)) CHECK(x == 1.0);
    CHECK(ggf_epoch_weights({0.7, 0.5, 0.9}, 0.9, 0.1, 4, 2)[1] == doctest::Approx(1.0));

    // The floor binds for deep ranks.
    const Vec floored = ggf_epoch_weights({0.1, 0.2, 0.3, 0.4, 0.5}, 0.5, 0.2, 2, 1);
    CHECK(floored[3] == doctest::Approx(0.2));
    CHECK(floored[4] == doctest::Approx(0.2));

    // Weights depend only on the accuracy order, not its scale.
    const Vec a = ggf_epoch_weights({0.2, 0.8, 0.5}, 0.9, 0.1, 2, 1);
    const Vec b = ggf_epoch_weights({0.02, 0.98, 0.55}, 0.9, 0.1, 2, 1);
    CHECK(a == b);
}
