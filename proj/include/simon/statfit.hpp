#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "simon/errors.hpp"
#include "simon/rng.hpp"

namespace simon {

enum class ScalingModel { polylog, poly, mixed };

inline const char* model_name(ScalingModel m) {
    switch (m) {
        case ScalingModel::polylog: return "polylog";
        case ScalingModel::poly: return "poly";
        case ScalingModel::mixed: return "mixed";
    }
    return "?";
}

inline int model_param_count(ScalingModel m) { return m == ScalingModel::mixed ? 3 : 2; }

/// Scaling laws in x = log2 N_w, all pinned to 0 at x = 0:
///   polylog: a x^alpha                  params (a, alpha), a > 0, alpha > 0
///   poly:    b (2^{beta x} - 1)         params (b, beta),  b > 0
///   mixed:   c (e^{C x^g ln(1+x)^{1-g}} - 1)   params (c, C, g), c, C > 0, g in [0, 1]
inline double model_eval(ScalingModel model, const std::vector<double>& params, double x) {
    if (x < 0.0) throw UsageError("model_eval: x = log2 N_w must be nonnegative");
    switch (model) {
        case ScalingModel::polylog: {
            if (params.size() != 2) throw UsageError("model_eval: polylog takes (a, alpha)");
            const double a = params[0], alpha = params[1];
            if (a <= 0.0 || alpha <= 0.0) throw UsageError("model_eval: need a > 0, alpha > 0");
            return x == 0.0 ? 0.0 : a * std::pow(x, alpha);
        }
        case ScalingModel::poly: {
            if (params.size() != 2) throw UsageError("model_eval: poly takes (b, beta)");
            const double b = params[0], beta = params[1];
            if (b <= 0.0) throw UsageError("model_eval: need b > 0");
            return b * std::expm1(beta * x * std::log(2.0));
        }
        case ScalingModel::mixed: {
            if (params.size() != 3) throw UsageError("model_eval: mixed takes (c, C, gamma)");
            const double c = params[0], big_c = params[1], g = params[2];
            if (c <= 0.0 || big_c <= 0.0 || g < 0.0 || g > 1.0)
                throw UsageError("model_eval: need c, C > 0 and gamma in [0, 1]");
            if (x == 0.0) return 0.0;
            const double exponent =
                big_c * std::pow(x, g) * std::pow(std::log1p(x), 1.0 - g);
            return c * std::expm1(exponent);
        }
    }
    throw UsageError("model_eval: unknown model");
}

struct ScalingPoint {
    double x = 0.0;     // log2 N_w
    double y = 0.0;     // NTS
    double sigma = 0.0; // standard error of y
};

/// Fit input: strictly increasing x, positive sigma.
class ScalingDataset {
public:
    explicit ScalingDataset(std::vector<ScalingPoint> points, std::string label = "")
        : points_(std::move(points)), label_(std::move(label)) {
        if (points_.empty()) throw UsageError("ScalingDataset: no points");
        for (std::size_t k = 0; k < points_.size(); ++k) {
            if (points_[k].sigma <= 0.0) throw DataError("ScalingDataset: sigma must be positive");
            if (k > 0 && points_[k].x <= points_[k - 1].x)
                throw DataError("ScalingDataset: x must be strictly increasing");
        }
    }

    const std::vector<ScalingPoint>& points() const { return points_; }
    const std::string& label() const { return label_; }
    std::size_t size() const { return points_.size(); }

    /// Small-size-effect variant: same data without the first `count` points.
    ScalingDataset drop_first(std::size_t count) const {
        if (count >= points_.size()) throw UsageError("ScalingDataset: dropping every point");
        return ScalingDataset(
            std::vector<ScalingPoint>(points_.begin() + static_cast<std::ptrdiff_t>(count),
                                      points_.end()),
            label_);
    }

private:
    std::vector<ScalingPoint> points_;
    std::string label_;
};

struct FitReport {
    ScalingModel model = ScalingModel::polylog;
    std::vector<double> params;
    std::vector<double> stderrs;
    std::vector<double> t_stats;
    std::vector<double> p_values;
    double ss_res = 0.0; // weighted residual sum of squares
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double aic = 0.0;
    double aicc = 0.0;
    double bic = 0.0;
    int dof = 0;
    bool converged = false;

    /// t and p of the leading scaling exponent (alpha, beta, or C).
    double exponent_t() const { return t_stats[1]; }
    double exponent_p() const { return p_values[1]; }
};

namespace detail {

inline void clamp_params(ScalingModel model, std::vector<double>& params) {
    constexpr double tiny = 1e-12;
    switch (model) {
        case ScalingModel::polylog:
            params[0] = std::max(params[0], tiny);
            params[1] = std::max(params[1], tiny);
            break;
        case ScalingModel::poly:
            params[0] = std::max(params[0], tiny);
            break;
        case ScalingModel::mixed:
            params[0] = std::max(params[0], tiny);
            params[1] = std::max(params[1], tiny);
            params[2] = std::clamp(params[2], 0.0, 1.0);
            break;
    }
}

inline double weighted_ss(ScalingModel model, const std::vector<double>& params,
                          const ScalingDataset& data) {
    double ss = 0.0;
    for (const auto& pt : data.points()) {
        const double r = (pt.y - model_eval(model, params, pt.x)) / pt.sigma;
        ss += r * r;
    }
    return ss;
}

/// Solves A v = rhs for a small symmetric positive system in place.
inline std::optional<std::vector<double>> solve_spd(std::vector<std::vector<double>> a,
                                                    std::vector<double> rhs) {
    const std::size_t m = rhs.size();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < m; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < 1e-300) return std::nullopt;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t row = 0; row < m; ++row) {
            if (row == col) continue;
            const double factor = a[row][col] / a[col][col];
            for (std::size_t k = col; k < m; ++k) a[row][k] -= factor * a[col][k];
            rhs[row] -= factor * rhs[col];
        }
    }
    for (std::size_t k = 0; k < m; ++k) rhs[k] /= a[k][k];
    return rhs;
}

inline std::vector<std::vector<double>> weighted_jacobian(ScalingModel model,
                                                          const std::vector<double>& params,
                                                          const ScalingDataset& data) {
    const std::size_t m = params.size();
    std::vector<std::vector<double>> jac(data.size(), std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        const double step = std::max(1e-7, 1e-7 * std::abs(params[j]));
        std::vector<double> hi = params, lo = params;
        hi[j] += step;
        lo[j] -= step;
        clamp_params(model, hi);
        clamp_params(model, lo);
        const double span = hi[j] - lo[j];
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& pt = data.points()[i];
            const double d =
                span > 0.0
                    ? (model_eval(model, hi, pt.x) - model_eval(model, lo, pt.x)) / span
                    : 0.0;
            jac[i][j] = d / pt.sigma;
        }
    }
    return jac;
}

/// Damped Gauss-Newton from one start; returns final params and objective.
inline std::pair<std::vector<double>, double> gauss_newton(ScalingModel model,
                                                           std::vector<double> params,
                                                           const ScalingDataset& data,
                                                           bool* converged) {
    clamp_params(model, params);
    double ss = weighted_ss(model, params, data);
    double damping = 1e-3;
    *converged = false;
    for (int iter = 0; iter < 500; ++iter) {
        const auto jac = weighted_jacobian(model, params, data);
        const std::size_t m = params.size();
        std::vector<std::vector<double>> normal(m, std::vector<double>(m, 0.0));
        std::vector<double> grad(m, 0.0);
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& pt = data.points()[i];
            const double r = (pt.y - model_eval(model, params, pt.x)) / pt.sigma;
            for (std::size_t j = 0; j < m; ++j) {
                grad[j] += jac[i][j] * r;
                for (std::size_t k = 0; k < m; ++k) normal[j][k] += jac[i][j] * jac[i][k];
            }
        }
        bool accepted = false;
        for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
            auto damped = normal;
            for (std::size_t j = 0; j < m; ++j)
                damped[j][j] += damping * std::max(normal[j][j], 1e-12);
            const auto step = solve_spd(damped, grad);
            if (step) {
                std::vector<double> trial = params;
                for (std::size_t j = 0; j < m; ++j) trial[j] += (*step)[j];
                clamp_params(model, trial);
                const double trial_ss = weighted_ss(model, trial, data);
                if (trial_ss <= ss) {
                    const double rel = (ss - trial_ss) / std::max(ss, 1e-300);
                    params = std::move(trial);
                    ss = trial_ss;
                    damping = std::max(damping * 0.5, 1e-12);
                    accepted = true;
                    if (rel < 1e-10) {
                        *converged = true;
                        return {params, ss};
                    }
                    break;
                }
            }
            damping *= 8.0;
        }
        if (!accepted) {
            *converged = true; // no descent direction left: stationary to precision
            return {params, ss};
        }
    }
    return {params, ss};
}

inline std::vector<std::vector<double>> starting_points(ScalingModel model,
                                                        const ScalingDataset& data) {
    const auto& last = data.points().back();
    const double y_scale = std::max(std::abs(last.y), 1e-3);
    const double x_scale = std::max(last.x, 1.0);
    std::vector<std::vector<double>> starts;
    const double amp_grid[] = {0.03, 0.3, 3.0};
    const double exp_grid[] = {0.25, 0.5, 1.0, 2.0};
    switch (model) {
        case ScalingModel::polylog:
            for (double amp : amp_grid)
                for (double e : exp_grid)
                    starts.push_back({amp * y_scale / std::pow(x_scale, e), e});
            break;
        case ScalingModel::poly:
            for (double amp : amp_grid)
                for (double e : exp_grid)
                    starts.push_back(
                        {amp * y_scale / std::max(std::exp2(e * x_scale) - 1.0, 1e-6), e});
            break;
        case ScalingModel::mixed:
            for (double amp : {0.1, 1.0})
                for (double e : {0.2, 0.7})
                    for (double g : {0.0, 0.5, 1.0})
                        starts.push_back({amp * y_scale, e, g});
            break;
    }
    return starts;
}

} // namespace detail

/// Weighted least squares via damped Gauss-Newton with multiple log-spaced
/// starting points. AIC convention: N ln(SS/N) + 2k.
inline FitReport fit(ScalingModel model, const ScalingDataset& data) {
    const int k = model_param_count(model);
    const int n_pts = static_cast<int>(data.size());
    if (n_pts <= k) throw DataError("fit: need more points than parameters");

    std::vector<double> best_params;
    double best_ss = std::numeric_limits<double>::infinity();
    bool best_converged = false;
    for (const auto& start : detail::starting_points(model, data)) {
        bool converged = false;
        auto [params, ss] = detail::gauss_newton(model, start, data, &converged);
        if (ss < best_ss) {
            best_ss = ss;
            best_params = std::move(params);
            best_converged = converged;
        }
    }

    FitReport report;
    report.model = model;
    report.params = best_params;
    report.converged = best_converged;
    report.ss_res = best_ss;
    report.dof = n_pts - k;

    // Covariance from the weighted normal equations scaled by residual variance.
    const auto jac = detail::weighted_jacobian(model, best_params, data);
    std::vector<std::vector<double>> normal(static_cast<std::size_t>(k),
                                            std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int i = 0; i < n_pts; ++i)
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                normal[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                    jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] *
                    jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
    const double resid_var = best_ss / static_cast<double>(report.dof);
    report.stderrs.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
    for (int a = 0; a < k; ++a) {
        std::vector<double> unit(static_cast<std::size_t>(k), 0.0);
        unit[static_cast<std::size_t>(a)] = 1.0;
        if (const auto col = detail::solve_spd(normal, unit)) {
            const double var = (*col)[static_cast<std::size_t>(a)] * resid_var;
            if (var >= 0.0) report.stderrs[static_cast<std::size_t>(a)] = std::sqrt(var);
        }
    }

    const boost::math::students_t t_dist(static_cast<double>(report.dof));
    report.t_stats.resize(static_cast<std::size_t>(k));
    report.p_values.resize(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) {
        const double se = report.stderrs[static_cast<std::size_t>(a)];
        const double t =
            (se > 0.0 && std::isfinite(se)) ? report.params[static_cast<std::size_t>(a)] / se : 0.0;
        report.t_stats[static_cast<std::size_t>(a)] = t;
        report.p_values[static_cast<std::size_t>(a)] =
            2.0 * boost::math::cdf(boost::math::complement(t_dist, std::abs(t)));
    }

    double mean_num = 0.0, mean_den = 0.0;
    for (const auto& pt : data.points()) {
        const double weight = 1.0 / (pt.sigma * pt.sigma);
        mean_num += weight * pt.y;
        mean_den += weight;
    }
    const double y_mean = mean_num / mean_den;
    double ss_tot = 0.0;
    for (const auto& pt : data.points()) {
        const double d = (pt.y - y_mean) / pt.sigma;
        ss_tot += d * d;
    }
    report.r2 = ss_tot > 0.0 ? 1.0 - best_ss / ss_tot : 1.0;
    report.adj_r2 =
        1.0 - (1.0 - report.r2) * static_cast<double>(n_pts - 1) / static_cast<double>(report.dof);

    const double n_d = static_cast<double>(n_pts);
    const double k_d = static_cast<double>(k);
    const double log_ms = std::log(std::max(best_ss / n_d, 1e-300));
    report.aic = n_d * log_ms + 2.0 * k_d;
    report.bic = n_d * log_ms + k_d * std::log(n_d);
    report.aicc = (n_pts - k - 1 > 0)
                      ? report.aic + 2.0 * k_d * (k_d + 1.0) / (n_d - k_d - 1.0)
                      : std::numeric_limits<double>::infinity();
    return report;
}

struct BootstrapResult {
    double mean = 0.0;
    double sigma = 0.0;
};

/// Nonparametric bootstrap of the mean: B resamples with replacement, then
/// mean and standard deviation of the resample means.
inline BootstrapResult bootstrap_nts(const std::vector<double>& replicas, std::uint64_t b_count,
                                     Rng& rng) {
    if (replicas.size() < 2) throw UsageError("bootstrap_nts: need at least 2 replicas");
    if (b_count < 2) throw UsageError("bootstrap_nts: need at least 2 resamples");
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::uint64_t rep = 0; rep < b_count; ++rep) {
        long double resample = 0.0L;
        for (std::size_t k = 0; k < replicas.size(); ++k)
            resample += replicas[rng.next_below(replicas.size())];
        resample /= static_cast<long double>(replicas.size());
        sum += resample;
        sum_sq += resample * resample;
    }
    BootstrapResult out;
    const long double mean = sum / static_cast<long double>(b_count);
    out.mean = static_cast<double>(mean);
    const long double var =
        std::max(sum_sq / static_cast<long double>(b_count) - mean * mean, 0.0L);
    out.sigma = static_cast<double>(std::sqrt(var));
    return out;
}

/// w_i = exp(-dAIC_i/2) / sum_j exp(-dAIC_j/2).
inline std::vector<double> akaike_weights(const std::vector<double>& aics) {
    if (aics.size() < 2) throw UsageError("akaike_weights: need at least 2 AICs");
    const double best = *std::min_element(aics.begin(), aics.end());
    if (!std::isfinite(best)) throw UsageError("akaike_weights: need finite AICs");
    std::vector<double> weights(aics.size());
    double total = 0.0;
    for (std::size_t k = 0; k < aics.size(); ++k) {
        weights[k] = std::exp(-(aics[k] - best) / 2.0);
        total += weights[k];
    }
    for (double& v : weights) v /= total;
    return weights;
}

enum class Verdict { polylog, poly, tie };

struct MeasureVote {
    const char* measure = "";
    Verdict winner = Verdict::tie;
};

struct ModelVerdict {
    std::vector<MeasureVote> votes; // t, r2, adj_r2, p, aic, aicc, bic
    int polylog_votes = 0;
    int poly_votes = 0;
    Verdict majority = Verdict::tie;
    double polylog_akaike_weight = 0.0;
};

/// Seven-measure comparison between the polylog and poly fits of one dataset:
/// higher t, R2 and adjusted R2 win; lower p, AIC, AICc and BIC win.
inline ModelVerdict model_select(const FitReport& polylog_fit, const FitReport& poly_fit) {
    if (polylog_fit.model != ScalingModel::polylog || poly_fit.model != ScalingModel::poly)
        throw UsageError("model_select: expected one polylog and one poly report");
    ModelVerdict verdict;
    const auto vote = [&](const char* name, double a, double b, bool higher_wins) {
        MeasureVote v;
        v.measure = name;
        if (a == b)
            v.winner = Verdict::tie;
        else if ((a > b) == higher_wins)
            v.winner = Verdict::polylog;
        else
            v.winner = Verdict::poly;
        if (v.winner == Verdict::polylog) ++verdict.polylog_votes;
        if (v.winner == Verdict::poly) ++verdict.poly_votes;
        verdict.votes.push_back(v);
    };
    vote("t", polylog_fit.exponent_t(), poly_fit.exponent_t(), true);
    vote("r2", polylog_fit.r2, poly_fit.r2, true);
    vote("adj_r2", polylog_fit.adj_r2, poly_fit.adj_r2, true);
    vote("p", polylog_fit.exponent_p(), poly_fit.exponent_p(), false);
    vote("aic", polylog_fit.aic, poly_fit.aic, false);
    vote("aicc", polylog_fit.aicc, poly_fit.aicc, false);
    vote("bic", polylog_fit.bic, poly_fit.bic, false);
    verdict.majority = verdict.polylog_votes > verdict.poly_votes  ? Verdict::polylog
                       : verdict.poly_votes > verdict.polylog_votes ? Verdict::poly
                                                                    : Verdict::tie;
    if (std::isfinite(polylog_fit.aic) && std::isfinite(poly_fit.aic))
        verdict.polylog_akaike_weight = akaike_weights({polylog_fit.aic, poly_fit.aic})[0];
    return verdict;
}

/// Transition Hamming weight: the smallest w whose majority vote goes to the
/// poly model, scanning ascending w. Absent a poly win, no value.
inline std::optional<int> transition_weight(const std::vector<std::pair<int, Verdict>>& per_w) {
    auto sorted = per_w;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [w, verdict] : sorted)
        if (verdict == Verdict::poly) return w;
    return std::nullopt;
}

} // namespace simon
