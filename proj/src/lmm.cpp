#include "gazedec/lmm.hpp"

#include "gazedec/errors.hpp"
#include "gazedec/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace gazedec {
namespace lmm {

namespace {

constexpr double kThetaDropTol = 1e-12;
constexpr double kSigmaFloor = 1e-12;

// dense lower Cholesky in place; throws on non-SPD
void cholesky(std::vector<double>& a, size_t n, const char* what) {
    for (size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0 || !std::isfinite(d))
            throw compute_error(ErrorKind::SingularDesign,
                                std::string(what) + ": matrix not positive definite");
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l;
        }
    }
}

// solve L L^T x = b given lower L
void chol_solve(const std::vector<double>& L, size_t n, std::vector<double>& b) {
    for (size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (size_t k = 0; k < i; ++k) s -= L[i * n + k] * b[k];
        b[i] = s / L[i * n + i];
    }
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t k = i + 1; k < n; ++k) s -= L[k * n + i] * b[k];
        b[i] = s / L[i * n + i];
    }
}

double log_det_from_chol(const std::vector<double>& L, size_t n) {
    double s = 0;
    for (size_t i = 0; i < n; ++i) s += std::log(L[i * n + i]);
    return 2.0 * s;
}

void validate_spec(const LmmSpec& spec) {
    const size_t n = spec.response.size();
    const size_t p = spec.n_fixed;
    if (n == 0 || p == 0 || spec.design.size() != n * p)
        throw data_error(ErrorKind::InvalidValue, "lmm: design does not match response length");
    if (spec.factors.size() > 3)
        throw data_error(ErrorKind::InvalidValue, "lmm: at most 3 grouping factors supported");
    for (const auto& f : spec.factors) {
        if (f.level.size() != n)
            throw data_error(ErrorKind::InvalidValue, "lmm: factor " + f.name + " row mismatch");
        if (f.n_levels < 2)
            throw data_error(ErrorKind::InvalidValue,
                             "lmm: factor " + f.name + " needs at least 2 levels");
        for (int l : f.level)
            if (l < 0 || l >= f.n_levels)
                throw data_error(ErrorKind::InvalidValue,
                                 "lmm: factor " + f.name + " has out-of-range level");
    }
}

// Precomputed cross-products; profiling at a given theta touches only
// q x q and p x p systems.
struct Workspace {
    const LmmSpec& spec;
    size_t n, p;
    std::vector<double> XtX, Xty;
    double yty = 0;
    std::vector<size_t> offset; // per factor, into the stacked u vector
    size_t q = 0;
    std::vector<double> ZtZ, ZtX, Zty;

    explicit Workspace(const LmmSpec& s) : spec(s), n(s.response.size()), p(s.n_fixed) {
        XtX.assign(p * p, 0.0);
        Xty.assign(p, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double* x = spec.design.data() + i * p;
            const double y = spec.response[i];
            yty += y * y;
            for (size_t a = 0; a < p; ++a) {
                Xty[a] += x[a] * y;
                for (size_t b = 0; b <= a; ++b) XtX[a * p + b] += x[a] * x[b];
            }
        }
        for (size_t a = 0; a < p; ++a)
            for (size_t b = a + 1; b < p; ++b) XtX[a * p + b] = XtX[b * p + a];

        for (const auto& f : spec.factors) {
            offset.push_back(q);
            q += static_cast<size_t>(f.n_levels);
        }
        if (q > 0) {
            ZtZ.assign(q * q, 0.0);
            ZtX.assign(q * p, 0.0);
            Zty.assign(q, 0.0);
            std::vector<size_t> cols(spec.factors.size());
            for (size_t i = 0; i < n; ++i) {
                for (size_t f = 0; f < spec.factors.size(); ++f)
                    cols[f] = offset[f] + static_cast<size_t>(spec.factors[f].level[i]);
                const double* x = spec.design.data() + i * p;
                const double y = spec.response[i];
                for (size_t a : cols) {
                    Zty[a] += y;
                    for (size_t j = 0; j < p; ++j) ZtX[a * p + j] += x[j];
                    for (size_t b : cols) ZtZ[a * q + b] += 1.0;
                }
            }
        }
    }

    // theta: one entry per factor in spec order.
    ProfileResult profile(const std::vector<double>& theta) const {
        std::vector<size_t> active;
        for (size_t f = 0; f < spec.factors.size(); ++f)
            if (theta[f] > kThetaDropTol) active.push_back(f);

        // stacked active indices into the full q range
        std::vector<size_t> cols;
        std::vector<double> dinv; // per active column
        double log_det_D = 0;
        for (size_t f : active) {
            const double t2 = theta[f] * theta[f];
            for (int l = 0; l < spec.factors[f].n_levels; ++l) {
                cols.push_back(offset[f] + static_cast<size_t>(l));
                dinv.push_back(1.0 / t2);
            }
            log_det_D += spec.factors[f].n_levels * std::log(t2);
        }
        const size_t qa = cols.size();

        // M22 = ZtZ[active,active] + D^-1
        std::vector<double> M22(qa * qa);
        for (size_t a = 0; a < qa; ++a) {
            for (size_t b = 0; b < qa; ++b) M22[a * qa + b] = ZtZ[cols[a] * q + cols[b]];
            M22[a * qa + a] += dinv[a];
        }
        double log_det_M22 = 0;
        std::vector<double> A2; // M22^-1 * ZtX_active  (qa x p)
        std::vector<double> a2; // M22^-1 * Zty_active
        if (qa > 0) {
            cholesky(M22, qa, "lmm random-effects system");
            log_det_M22 = log_det_from_chol(M22, qa);
            A2.assign(qa * p, 0.0);
            std::vector<double> col(qa);
            for (size_t j = 0; j < p; ++j) {
                for (size_t a = 0; a < qa; ++a) col[a] = ZtX[cols[a] * p + j];
                chol_solve(M22, qa, col);
                for (size_t a = 0; a < qa; ++a) A2[a * p + j] = col[a];
            }
            a2.assign(qa, 0.0);
            for (size_t a = 0; a < qa; ++a) a2[a] = Zty[cols[a]];
            chol_solve(M22, qa, a2);
        }

        // S = XtX - ZtX_a^T A2 ; rhs = Xty - ZtX_a^T a2
        std::vector<double> S = XtX;
        std::vector<double> rhs = Xty;
        for (size_t a = 0; a < qa; ++a) {
            const double* zx = ZtX.data() + cols[a] * p;
            const double* ar = A2.data() + a * p;
            for (size_t i = 0; i < p; ++i) {
                rhs[i] -= zx[i] * a2[a];
                for (size_t j = 0; j < p; ++j) S[i * p + j] -= zx[i] * ar[j];
            }
        }
        std::vector<double> L = S;
        cholesky(L, p, "lmm fixed-effects system");
        std::vector<double> beta = rhs;
        chol_solve(L, p, beta);

        std::vector<double> u(qa, 0.0);
        for (size_t a = 0; a < qa; ++a) {
            u[a] = a2[a];
            const double* ar = A2.data() + a * p;
            for (size_t j = 0; j < p; ++j) u[a] -= ar[j] * beta[j];
        }

        // penalized RSS via the residuals; active factors are stacked in
        // order, so each one starts at a fixed base inside u
        std::vector<size_t> active_base(active.size(), 0);
        for (size_t fa = 1; fa < active.size(); ++fa)
            active_base[fa] = active_base[fa - 1] +
                              static_cast<size_t>(spec.factors[active[fa - 1]].n_levels);
        double rss = 0;
        for (size_t i = 0; i < n; ++i) {
            double r = spec.response[i];
            const double* x = spec.design.data() + i * p;
            for (size_t j = 0; j < p; ++j) r -= x[j] * beta[j];
            for (size_t fa = 0; fa < active.size(); ++fa) {
                const size_t f = active[fa];
                r -= u[active_base[fa] + static_cast<size_t>(spec.factors[f].level[i])];
            }
            rss += r * r;
        }
        double prss = rss;
        for (size_t a = 0; a < qa; ++a) prss += u[a] * u[a] * dinv[a];

        ProfileResult out;
        out.beta = beta;
        out.sigma2 = std::max(prss / static_cast<double>(n), kSigmaFloor);
        const double log_det_V = log_det_M22 + log_det_D;
        out.loglik = -0.5 * static_cast<double>(n) *
                         (std::log(2.0 * M_PI * out.sigma2) + 1.0) -
                     0.5 * log_det_V;

        // SE from sigma2 * S^-1 diagonal
        out.se.assign(p, 0.0);
        std::vector<double> e(p);
        for (size_t j = 0; j < p; ++j) {
            std::fill(e.begin(), e.end(), 0.0);
            e[j] = 1.0;
            chol_solve(L, p, e);
            out.se[j] = std::sqrt(std::max(out.sigma2 * e[j], 0.0));
        }
        return out;
    }
};

struct NelderMead {
    int evals = 0;
    double best_value = -1e300;
    std::vector<double> best_x;

    template <typename F>
    void run(F&& f, std::vector<double> x0, int max_evals, double diameter_tol) {
        const size_t d = x0.size();
        std::vector<std::vector<double>> xs(d + 1, x0);
        std::vector<double> fs(d + 1);
        for (size_t i = 0; i < d; ++i) xs[i + 1][i] += 0.5;
        for (size_t i = 0; i <= d; ++i) fs[i] = -f(xs[i]); // minimize -loglik
        evals += static_cast<int>(d) + 1;

        auto record = [&]() {
            for (size_t i = 0; i <= d; ++i) {
                if (-fs[i] > best_value) {
                    best_value = -fs[i];
                    best_x = xs[i];
                }
            }
        };
        record();

        while (evals < max_evals) {
            std::vector<size_t> ord(d + 1);
            std::iota(ord.begin(), ord.end(), size_t{0});
            std::sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return fs[a] < fs[b]; });

            double diameter = 0;
            for (size_t i = 1; i <= d; ++i)
                for (size_t j = 0; j < d; ++j)
                    diameter = std::max(diameter, std::abs(xs[ord[i]][j] - xs[ord[0]][j]));
            if (diameter < diameter_tol) break;

            const auto& best = xs[ord[0]];
            auto& worst = xs[ord[d]];
            std::vector<double> centroid(d, 0.0);
            for (size_t i = 0; i < d; ++i) {
                for (size_t j = 0; j < d; ++j) centroid[j] += xs[ord[i]][j];
            }
            for (double& c : centroid) c /= static_cast<double>(d);

            auto point = [&](double coef) {
                std::vector<double> xr(d);
                for (size_t j = 0; j < d; ++j) xr[j] = centroid[j] + coef * (worst[j] - centroid[j]);
                return xr;
            };

            std::vector<double> xr = point(-1.0);
            const double fr = -f(xr);
            ++evals;
            if (fr < fs[ord[0]]) {
                std::vector<double> xe = point(-2.0);
                const double fe = -f(xe);
                ++evals;
                if (fe < fr) {
                    worst = xe;
                    fs[ord[d]] = fe;
                } else {
                    worst = xr;
                    fs[ord[d]] = fr;
                }
            } else if (fr < fs[ord[d - 1]]) {
                worst = xr;
                fs[ord[d]] = fr;
            } else {
                std::vector<double> xc = point(0.5);
                const double fc = -f(xc);
                ++evals;
                if (fc < fs[ord[d]]) {
                    worst = xc;
                    fs[ord[d]] = fc;
                } else {
                    for (size_t i = 1; i <= d; ++i) {
                        for (size_t j = 0; j < d; ++j)
                            xs[ord[i]][j] = best[j] + 0.5 * (xs[ord[i]][j] - best[j]);
                        fs[ord[i]] = -f(xs[ord[i]]);
                        ++evals;
                    }
                }
            }
            record();
        }
        record();
    }
};

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

} // namespace

ProfileResult lmm_profile(const LmmSpec& spec, const std::vector<double>& theta) {
    validate_spec(spec);
    if (theta.size() != spec.factors.size())
        throw data_error(ErrorKind::InvalidValue, "lmm: theta size does not match factor count");
    Workspace ws(spec);
    return ws.profile(theta);
}

LmmFit lmm_fit(const LmmSpec& spec) {
    validate_spec(spec);
    Workspace ws(spec);
    const size_t nf = spec.factors.size();

    LmmFit fit;
    fit.fixed_names = spec.fixed_names;

    if (nf == 0) {
        const ProfileResult r = ws.profile({});
        fit.beta = r.beta;
        fit.se = r.se;
        fit.sigma2 = r.sigma2;
        fit.loglik = r.loglik;
        fit.wald = wald_tests(fit.beta, fit.se, 1);
        return fit;
    }

    auto loglik_at = [&](const std::vector<double>& log_theta) {
        std::vector<double> theta(nf);
        for (size_t f = 0; f < nf; ++f) theta[f] = std::exp(log_theta[f]);
        return ws.profile(theta).loglik;
    };

    NelderMead nm;
    for (double start : {0.01, 0.3, 1.0}) {
        std::vector<double> x0(nf, std::log(start));
        nm.run(loglik_at, x0, 10000, 1e-8);
    }
    if (nm.best_x.empty())
        throw compute_error(ErrorKind::NonConvergence, "lmm: optimizer produced no candidate");

    fit.theta.assign(nf, 0.0);
    for (size_t f = 0; f < nf; ++f) fit.theta[f] = std::exp(nm.best_x[f]);
    const ProfileResult r = ws.profile(fit.theta);
    fit.beta = r.beta;
    fit.se = r.se;
    fit.sigma2 = r.sigma2;
    fit.loglik = r.loglik;
    fit.nelder_mead_evals = nm.evals;
    fit.wald = wald_tests(fit.beta, fit.se, 1);
    return fit;
}

std::vector<WaldTest> wald_tests(const std::vector<double>& beta, const std::vector<double>& se,
                                 int bonferroni_k) {
    std::vector<WaldTest> out(beta.size());
    for (size_t i = 0; i < beta.size(); ++i) {
        WaldTest& w = out[i];
        if (se[i] < 1e-30) {
            w.z = 0.0;
            w.p_raw = beta[i] == 0.0 ? 1.0 : 0.0;
        } else {
            w.z = beta[i] / se[i];
            w.p_raw = normal_two_sided_p(w.z);
        }
        w.p_corrected = std::min(1.0, bonferroni_k * w.p_raw);
    }
    return out;
}

namespace {

std::map<std::string, const Trial*> trial_index(const Corpus& corpus) {
    std::map<std::string, const Trial*> out;
    for (const Trial& t : corpus.trials) out[t.key()] = &t;
    return out;
}

int level_of(std::map<std::string, int>& levels, const std::string& key) {
    auto [it, inserted] = levels.emplace(key, static_cast<int>(levels.size()));
    (void)inserted;
    return it->second;
}

} // namespace

CompareResult compare_models(const std::vector<eval::PredRecord>& preds_a,
                             const std::vector<eval::PredRecord>& preds_b,
                             const Corpus& corpus) {
    if (preds_a.size() != preds_b.size() || preds_a.empty())
        throw data_error(ErrorKind::InvalidValue,
                         "compare_models: prediction sets must cover the same trials");
    (void)corpus;

    LmmSpec spec;
    spec.n_fixed = 2;
    spec.fixed_names = {"intercept", "model_b"};
    std::map<std::string, int> participant_levels, paragraph_levels;
    std::vector<int> participant_col, paragraph_col;

    auto add = [&](const eval::PredRecord& r, double indicator) {
        spec.response.push_back(r.correct() ? 1.0 : 0.0);
        spec.design.push_back(1.0);
        spec.design.push_back(indicator);
        participant_col.push_back(level_of(participant_levels, r.participant_id));
        paragraph_col.push_back(level_of(paragraph_levels, r.paragraph_id));
    };
    for (const auto& r : preds_a) add(r, 0.0);
    for (const auto& r : preds_b) add(r, 1.0);

    if (participant_levels.size() >= 2)
        spec.factors.push_back({"participant", participant_col,
                                static_cast<int>(participant_levels.size())});
    if (paragraph_levels.size() >= 2)
        spec.factors.push_back({"paragraph", paragraph_col,
                                static_cast<int>(paragraph_levels.size())});

    CompareResult out;
    out.fit = lmm_fit(spec);
    out.coefficient = out.fit.beta[1];
    out.se = out.fit.se[1];
    out.z = out.fit.wald[1].z;
    out.p = out.fit.wald[1].p_raw;
    return out;
}

const std::array<const char*, kTrialFeatureCount>& trial_feature_names() {
    static const std::array<const char*, kTrialFeatureCount> names = {
        "rt_before_cs",      "rt_within_cs",      "rt_after_cs",        "paragraph_position",
        "answered_correctly", "paragraph_length", "paragraph_level",    "cs_start_relative",
        "cs_length_relative", "question_difficulty"};
    return names;
}

std::array<double, kTrialFeatureCount> trial_feature_row(const Trial& t) {
    double before = 0, within = 0, after = 0;
    for (const Fixation& f : t.fixations) {
        if (f.word_index < 0) continue;
        if (f.word_index < t.cs_start_word)
            before += f.duration_ms;
        else if (f.word_index <= t.cs_end_word)
            within += f.duration_ms;
        else
            after += f.duration_ms;
    }
    const double n_words = static_cast<double>(t.word_count());
    return {before,
            within,
            after,
            static_cast<double>(t.paragraph_position),
            t.answered_correctly ? 1.0 : 0.0,
            n_words,
            t.level == Level::Advanced ? 1.0 : 0.0,
            static_cast<double>(t.cs_start_word) / n_words,
            static_cast<double>(t.cs_end_word - t.cs_start_word + 1) / n_words,
            t.question_difficulty};
}

ErrorAnalysisResult error_analysis(const std::vector<eval::PredRecord>& predictions,
                                   const Corpus& corpus, Goal goal_subset,
                                   const ErrorAnalysisOptions& options) {
    const auto index = trial_index(corpus);

    std::vector<const eval::PredRecord*> subset;
    for (const auto& r : predictions)
        if (r.label_true == goal_subset) subset.push_back(&r);
    if (subset.empty())
        throw data_error(ErrorKind::MissingFeature, "error_analysis: no predictions in subset");

    const size_t n = subset.size();
    std::vector<double> raw(n * kTrialFeatureCount);
    std::vector<double> response(n);
    std::map<std::string, int> item_levels, participant_levels, regime_levels;
    std::vector<int> item_col(n), participant_col(n), regime_col(n);

    for (size_t i = 0; i < n; ++i) {
        const eval::PredRecord& r = *subset[i];
        auto it = index.find(r.participant_id + "/" + r.paragraph_id);
        if (it == index.end())
            throw data_error(ErrorKind::MissingFeature,
                             "error_analysis: corpus lacks trial " + r.participant_id + "/" +
                                 r.paragraph_id);
        const auto row = trial_feature_row(*it->second);
        std::copy(row.begin(), row.end(), raw.begin() + static_cast<long>(i * kTrialFeatureCount));
        double p = r.prob_true();
        if (options.logit_response) {
            p = std::clamp(p, 1e-6, 1.0 - 1e-6);
            p = std::log(p / (1.0 - p));
        }
        response[i] = p;
        item_col[i] = level_of(item_levels, r.paragraph_id);
        participant_col[i] = level_of(participant_levels, r.participant_id);
        regime_col[i] = level_of(regime_levels, std::string(to_string(r.regime)));
    }

    // z-normalize the predictors over the analysis subset
    const Standardizer st = fit_standardizer(raw, kTrialFeatureCount);
    for (size_t i = 0; i < n; ++i) st.apply_row(raw.data() + i * kTrialFeatureCount);

    LmmSpec spec;
    spec.response = std::move(response);
    spec.n_fixed = 1 + kTrialFeatureCount;
    spec.fixed_names.push_back("intercept");
    for (const char* name : trial_feature_names()) spec.fixed_names.push_back(name);
    spec.design.reserve(n * spec.n_fixed);
    for (size_t i = 0; i < n; ++i) {
        spec.design.push_back(1.0);
        for (int j = 0; j < kTrialFeatureCount; ++j)
            spec.design.push_back(raw[i * kTrialFeatureCount + static_cast<size_t>(j)]);
    }
    if (item_levels.size() >= 2)
        spec.factors.push_back({"item", item_col, static_cast<int>(item_levels.size())});
    if (participant_levels.size() >= 2)
        spec.factors.push_back(
            {"participant", participant_col, static_cast<int>(participant_levels.size())});
    if (regime_levels.size() >= 2)
        spec.factors.push_back({"regime", regime_col, static_cast<int>(regime_levels.size())});

    ErrorAnalysisResult out;
    out.goal_subset = to_string(goal_subset);
    out.fit = lmm_fit(spec);
    out.fit.wald = wald_tests(out.fit.beta, out.fit.se, options.bonferroni_k);
    out.n_rows = n;
    return out;
}

} // namespace lmm
} // namespace gazedec
