#include <doctest.h>

#include "gazedec/errors.hpp"
#include "gazedec/logistic.hpp"
#include "gazedec/rng.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace gazedec;

TEST_SUITE("logistic") {

TEST_CASE("separable data reaches training accuracy 1 without a penalty") {
    Rng rng(1);
    std::vector<double> X;
    std::vector<int> y;
    for (int i = 0; i < 80; ++i) {
        const double a = rnorm(rng), b = rnorm(rng);
        X.push_back(a);
        X.push_back(b);
        y.push_back(a + b > 0 ? 1 : 0);
    }
    LogisticFitOptions opt;
    opt.max_iterations = 5000;
    const LogisticModel m = fit_logistic(X, y, 2, opt);
    CHECK(logistic_accuracy(m, X, y, 2) == doctest::Approx(1.0));
}

TEST_CASE("strong L2 shrinks weights to zero and probability to the base rate") {
    Rng rng(2);
    std::vector<double> X;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        X.push_back(rnorm(rng));
        y.push_back(i < 70 ? 1 : 0); // base rate 0.7
    }
    LogisticFitOptions opt;
    opt.lambda = 100.0; // C -> 0+ direction; intercept stays unpenalized
    const LogisticModel m = fit_logistic(X, y, 1, opt);
    CHECK(std::abs(m.weights[0]) < 1e-2);
    const double x0 = 0.3;
    CHECK(m.probability(&x0) == doctest::Approx(0.7).epsilon(0.02));
}

TEST_CASE("gradient descent agrees with the IRLS oracle to 1e-4") {
    Rng rng(3);
    std::vector<double> X;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        const double a = rnorm(rng), b = rnorm(rng);
        X.push_back(a);
        X.push_back(b);
        // noisy labels keep the problem non-separable
        const double p = 1.0 / (1.0 + std::exp(-(0.8 * a - 0.5 * b + 0.2)));
        y.push_back(runif(rng) < p ? 1 : 0);
    }
    const LogisticModel m = fit_logistic(X, y, 2);
    REQUIRE(m.converged);
    const auto w = oracles::irls_logistic(X, y, 2);
    CHECK(m.weights[0] == doctest::Approx(w[0]).epsilon(1e-4));
    CHECK(m.weights[1] == doctest::Approx(w[1]).epsilon(1e-4));
    CHECK(m.intercept == doctest::Approx(w[2]).epsilon(1e-4));
}

TEST_CASE("require_convergence raises NonConvergence at a tiny iteration cap") {
    Rng rng(4);
    std::vector<double> X;
    std::vector<int> y;
    for (int i = 0; i < 50; ++i) {
        X.push_back(rnorm(rng));
        y.push_back(runif(rng) < 0.5 ? 1 : 0);
    }
    LogisticFitOptions opt;
    opt.max_iterations = 1;
    opt.require_convergence = true;
    CHECK_THROWS_AS(fit_logistic(X, y, 1, opt), Error);
}

} // TEST_SUITE
