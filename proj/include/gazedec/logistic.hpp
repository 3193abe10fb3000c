#pragma once

#include <cstddef>
#include <vector>

namespace gazedec {

// Binary logistic regression fit by gradient descent with backtracking
// line search. Objective: mean BCE + lambda/2 * ||w||^2 (intercept
// unpenalized). lambda = 0 disables the penalty; the sklearn-style
// inverse regularization C maps to lambda = 1 / (C * n).
struct LogisticModel {
    std::vector<double> weights;
    double intercept = 0.0;
    bool converged = false;   // gradient norm < tol reached
    double grad_norm = 0.0;
    int iterations = 0;

    double logit(const double* x) const;
    double probability(const double* x) const;
};

struct LogisticFitOptions {
    double lambda = 0.0;
    double tol = 1e-8;        // on the gradient L2 norm
    int max_iterations = 200000;
    // When set, hitting the iteration cap above tol throws NonConvergence
    // instead of returning the best-so-far parameters. Off by default so
    // separable problems (where the unpenalized optimum is at infinity)
    // still yield a usable classifier.
    bool require_convergence = false;
};

// X: n x dim row-major, y in {0,1}.
LogisticModel fit_logistic(const std::vector<double>& X, const std::vector<int>& y,
                           size_t dim, const LogisticFitOptions& options = {});

double logistic_accuracy(const LogisticModel& m, const std::vector<double>& X,
                         const std::vector<int>& y, size_t dim);

} // namespace gazedec
