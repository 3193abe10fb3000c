#include "gazedec/logistic.hpp"

#include "gazedec/errors.hpp"

#include <cmath>

namespace gazedec {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// numerically stable BCE from the logit
double bce_from_logit(double z, int y) {
    // log(1 + e^z) - y*z, computed stably
    const double softplus = z > 30 ? z : std::log1p(std::exp(std::min(z, 30.0)));
    return softplus - y * z;
}

struct Objective {
    const std::vector<double>& X;
    const std::vector<int>& y;
    size_t n;
    size_t dim;
    double lambda;

    double value(const std::vector<double>& w, double b) const {
        double loss = 0;
        for (size_t i = 0; i < n; ++i) {
            double z = b;
            const double* xi = X.data() + i * dim;
            for (size_t j = 0; j < dim; ++j) z += w[j] * xi[j];
            loss += bce_from_logit(z, y[i]);
        }
        loss /= static_cast<double>(n);
        if (lambda > 0) {
            double ss = 0;
            for (double v : w) ss += v * v;
            loss += 0.5 * lambda * ss;
        }
        return loss;
    }

    // returns gradient L2 norm
    double gradient(const std::vector<double>& w, double b, std::vector<double>& gw,
                    double& gb) const {
        gw.assign(dim, 0.0);
        gb = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double z = b;
            const double* xi = X.data() + i * dim;
            for (size_t j = 0; j < dim; ++j) z += w[j] * xi[j];
            const double r = sigmoid(z) - y[i];
            for (size_t j = 0; j < dim; ++j) gw[j] += r * xi[j];
            gb += r;
        }
        double norm2 = 0;
        for (size_t j = 0; j < dim; ++j) {
            gw[j] /= static_cast<double>(n);
            if (lambda > 0) gw[j] += lambda * w[j];
            norm2 += gw[j] * gw[j];
        }
        gb /= static_cast<double>(n);
        norm2 += gb * gb;
        return std::sqrt(norm2);
    }
};

} // namespace

double LogisticModel::logit(const double* x) const {
    double z = intercept;
    for (size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
    return z;
}

double LogisticModel::probability(const double* x) const { return sigmoid(logit(x)); }

LogisticModel fit_logistic(const std::vector<double>& X, const std::vector<int>& y,
                           size_t dim, const LogisticFitOptions& opt) {
    if (y.empty() || dim == 0 || X.size() != y.size() * dim)
        throw compute_error(ErrorKind::EmptyTrainingSet, "logistic fit needs nonempty X and y");

    Objective obj{X, y, y.size(), dim, opt.lambda};
    std::vector<double> w(dim, 0.0), gw;
    double b = 0.0, gb = 0.0;

    double f = obj.value(w, b);
    double step = 1.0;
    LogisticModel model;
    int it = 0;
    double gnorm = obj.gradient(w, b, gw, gb);

    while (it < opt.max_iterations && gnorm >= opt.tol) {
        // backtracking line search on the Armijo condition
        const double gsq = gnorm * gnorm;
        double trial_step = std::min(step * 2.0, 1e6);
        std::vector<double> w2(dim);
        double b2, f2;
        for (;;) {
            for (size_t j = 0; j < dim; ++j) w2[j] = w[j] - trial_step * gw[j];
            b2 = b - trial_step * gb;
            f2 = obj.value(w2, b2);
            if (f2 <= f - 0.25 * trial_step * gsq || trial_step < 1e-18) break;
            trial_step *= 0.5;
        }
        w.swap(w2);
        b = b2;
        f = f2;
        step = trial_step;
        ++it;
        gnorm = obj.gradient(w, b, gw, gb);
    }

    if (gnorm >= opt.tol && opt.require_convergence)
        throw compute_error(ErrorKind::NonConvergence,
                            "logistic fit did not reach gradient norm " + std::to_string(opt.tol) +
                                " within " + std::to_string(opt.max_iterations) + " iterations");

    model.weights = std::move(w);
    model.intercept = b;
    model.converged = gnorm < opt.tol;
    model.grad_norm = gnorm;
    model.iterations = it;
    return model;
}

double logistic_accuracy(const LogisticModel& m, const std::vector<double>& X,
                         const std::vector<int>& y, size_t dim) {
    if (y.empty()) return 0.0;
    size_t correct = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        const int pred = m.probability(X.data() + i * dim) >= 0.5 ? 1 : 0;
        if (pred == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

} // namespace gazedec
