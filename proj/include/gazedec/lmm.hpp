#pragma once

#include "gazedec/core.hpp"
#include "gazedec/eval.hpp"

#include <string>
#include <vector>

namespace gazedec {
namespace lmm {

// Gaussian linear mixed model with crossed random intercepts,
//   y = X beta + sum_f Z_f u_f + eps,  u_f ~ N(0, sigma^2 theta_f^2 I).
// ML estimation: beta and sigma^2 profiled out in closed form via the
// mixed-model normal equations; theta optimized by Nelder-Mead over
// log(theta) with multi-start.
struct GroupingFactor {
    std::string name;
    std::vector<int> level; // per row, 0-based
    int n_levels = 0;
};

struct LmmSpec {
    std::vector<double> response;
    std::vector<double> design; // n x p row-major, includes the intercept column
    size_t n_fixed = 0;
    std::vector<std::string> fixed_names;
    std::vector<GroupingFactor> factors; // 0 to 3
};

struct WaldTest {
    double z = 0.0;
    double p_raw = 1.0;
    double p_corrected = 1.0;
};

struct LmmFit {
    std::vector<double> beta;
    std::vector<double> se;
    double sigma2 = 0.0;
    std::vector<double> theta; // per-factor std ratio to residual sd
    double loglik = 0.0;
    std::vector<WaldTest> wald;
    std::vector<std::string> fixed_names;
    int nelder_mead_evals = 0;
};

// Profiled evaluation at fixed theta (factors with theta <= 0 drop out).
struct ProfileResult {
    std::vector<double> beta;
    std::vector<double> se;
    double sigma2 = 0.0;
    double loglik = 0.0;
};
ProfileResult lmm_profile(const LmmSpec& spec, const std::vector<double>& theta);

LmmFit lmm_fit(const LmmSpec& spec);

// z = beta/se, two-sided normal p, Bonferroni corrected by k.
std::vector<WaldTest> wald_tests(const std::vector<double>& beta, const std::vector<double>& se,
                                 int bonferroni_k);

// ---------------------------------------------------------------------
// The two analyses from the pipeline.

struct CompareResult {
    double coefficient = 0.0; // effect of model B relative to model A
    double se = 0.0;
    double z = 0.0;
    double p = 1.0;
    LmmFit fit;
};

// Stacks correctness indicators of both models; fixed effect = model
// indicator; random intercepts for participant and paragraph.
CompareResult compare_models(const std::vector<eval::PredRecord>& preds_a,
                             const std::vector<eval::PredRecord>& preds_b,
                             const Corpus& corpus);

inline constexpr int kTrialFeatureCount = 10;
const std::array<const char*, kTrialFeatureCount>& trial_feature_names();

// The 10 App-style predictors for one trial, raw units.
std::array<double, kTrialFeatureCount> trial_feature_row(const Trial& trial);

struct ErrorAnalysisOptions {
    bool logit_response = false; // default: raw probability of the true label
    int bonferroni_k = 10;
};

struct ErrorAnalysisResult {
    std::string goal_subset;
    LmmFit fit; // coefficients over intercept + 10 z-normalized features
    size_t n_rows = 0;
};

// Fits P(correct) ~ feat_1 + ... + feat_10 + (1|item) + (1|participant)
// + (1|regime) on the predictions of one goal subset. Factors with a
// single observed level are dropped.
ErrorAnalysisResult error_analysis(const std::vector<eval::PredRecord>& predictions,
                                   const Corpus& corpus, Goal goal_subset,
                                   const ErrorAnalysisOptions& options = {});

} // namespace lmm
} // namespace gazedec
