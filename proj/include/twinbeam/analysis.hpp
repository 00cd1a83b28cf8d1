#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "twinbeam/errors.hpp"
#include "twinbeam/series.hpp"
#include "twinbeam/stats.hpp"

namespace twinbeam {

enum class Classification { Classical, Nonclassical, OverSubtracted };

inline const char* to_string(Classification c) {
    switch (c) {
    case Classification::Classical: return "classical";
    case Classification::Nonclassical: return "nonclassical";
    case Classification::OverSubtracted: return "over-subtracted";
    }
    return "unknown";
}

struct AnalysisOptions {
    bool corrected = false;   // subtract dark-run moments
    std::int64_t j_max = 0;   // highest lag of the correlation profile
    double bin_width = 1.0;   // electrons per histogram bin
    // Nonclassicality floor 1-eta when the efficiency is known; NaN keeps
    // the over-subtracted flag disabled (a bare shot file carries no eta).
    double floor_r = std::numeric_limits<double>::quiet_NaN();
    double z = 3.0;           // statistical tolerance, in standard errors
};

struct AnalysisReport {
    std::uint64_t count = 0;
    bool corrected = false;
    double mean_s = 0.0;
    double mean_i = 0.0;
    double var_s_raw = 0.0;
    double var_i_raw = 0.0;
    double sigma2_d_raw = 0.0;
    double sigma2_d_dark = 0.0; // subtracted dark contribution (0 if uncorrected)
    double sigma2_d = 0.0;      // after subtraction
    double snl = 0.0;
    double r_linear = 0.0;
    std::optional<double> r_db; // empty when r_linear <= 0
    double r_stderr = 0.0;
    double fano_s = 0.0;
    double fano_i = 0.0;
    std::vector<double> gamma;  // lags 0..j_max
    Classification classification = Classification::Classical;
    double floor_r = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void require_dark(const ShotSeries& series) {
    if (!series.dark)
        throw DataError("dark correction requested but the series has no dark statistics");
}

// Lagged cross-covariance with global means, normalized by the pair count.
inline double lag_covariance(const std::vector<double>& s, const std::vector<double>& i,
                             double mean_s, double mean_i, std::size_t j) {
    const std::size_t pairs = s.size() - j;
    std::vector<double> prod(pairs);
    for (std::size_t k = 0; k < pairs; ++k)
        prod[k] = (s[k] - mean_s) * (i[k + j] - mean_i);
    return pairwise_sum(prod) / static_cast<double>(pairs);
}

} // namespace detail

// Correlation profile Gamma(j) between the signal record and the idler
// record lagged by j pulses. Correction replaces each variance in the
// denominator by variance minus dark variance and subtracts the dark
// covariance from the zero-lag numerator. Over-subtraction (a nonpositive
// corrected variance, or |Gamma| pushed beyond 1) is an error, never
// silently clamped.
inline std::vector<double> gamma_profile(const ShotSeries& series, std::int64_t j_max, bool corrected) {
    const std::size_t count = series.size();
    if (count < 2) throw DataError("gamma_profile: need at least 2 shots");
    if (j_max < 0 || static_cast<std::size_t>(j_max) >= count)
        throw ParameterError("gamma_profile: j_max must lie in [0, K)");
    if (corrected) detail::require_dark(series);

    const auto s = column_s(series.shots);
    const auto i = column_i(series.shots);
    const double ms = mean(s);
    const double mi = mean(i);
    double var_s = variance(s);
    double var_i = variance(i);
    double dark_cov = 0.0;
    if (corrected) {
        var_s -= series.dark->var_s;
        var_i -= series.dark->var_i;
        dark_cov = series.dark->cov;
        if (!(var_s > 0.0) || !(var_i > 0.0))
            throw NumericalError("gamma_profile: dark variance over-subtraction leaves a nonpositive variance");
    }
    const double denom = std::sqrt(var_s * var_i);

    std::vector<double> gamma(static_cast<std::size_t>(j_max) + 1);
    for (std::int64_t j = 0; j <= j_max; ++j) {
        double num = detail::lag_covariance(s, i, ms, mi, static_cast<std::size_t>(j));
        if (corrected && j == 0) num -= dark_cov;
        gamma[static_cast<std::size_t>(j)] = num / denom;
    }
    if (corrected && std::fabs(gamma[0]) > 1.0 + 1e-12)
        throw NumericalError("gamma_profile: corrected correlation beyond 1, dark over-subtraction");
    return gamma;
}

inline Histogram difference_histogram(const ShotSeries& series, double bin_width = 1.0) {
    if (series.size() == 0) throw DataError("difference_histogram: empty series");
    std::vector<double> d(series.size());
    for (std::size_t k = 0; k < series.size(); ++k)
        d[k] = series.shots[k].m_s - series.shots[k].m_i;
    // Center bins on integers: electron-unit differences cluster near 0.
    return make_histogram(d, bin_width, -0.5 * bin_width);
}

inline Classification classify(double r, double floor_r, double stderr_r, double z) {
    if (std::isfinite(floor_r) && r < floor_r - z * stderr_r)
        return Classification::OverSubtracted;
    if (r < 1.0) return Classification::Nonclassical;
    return Classification::Classical;
}

// Difference-variance estimator R = (Var(d) - Var(d)_dark) / (<m_s> + <m_i>),
// with per-arm dark-corrected Fano factors and the lag profile alongside.
// The standard error treats the dark run as Gaussian noise; the signal
// fourth moment is taken from the data.
inline AnalysisReport noise_reduction(const ShotSeries& series, const AnalysisOptions& opts = {}) {
    const std::size_t count = series.size();
    if (count < 2) throw DataError("noise_reduction: need at least 2 shots");
    if (opts.corrected) detail::require_dark(series);

    const auto s = column_s(series.shots);
    const auto i = column_i(series.shots);

    AnalysisReport rep;
    rep.count = count;
    rep.corrected = opts.corrected;
    rep.mean_s = mean(s);
    rep.mean_i = mean(i);
    rep.var_s_raw = variance(s);
    rep.var_i_raw = variance(i);

    std::vector<double> d(count);
    for (std::size_t k = 0; k < count; ++k) d[k] = s[k] - i[k];
    rep.sigma2_d_raw = variance(d);

    double dark_var_s = 0.0, dark_var_i = 0.0;
    if (opts.corrected) {
        dark_var_s = series.dark->var_s;
        dark_var_i = series.dark->var_i;
        rep.sigma2_d_dark = dark_var_s + dark_var_i - 2.0 * series.dark->cov;
    }
    rep.sigma2_d = rep.sigma2_d_raw - rep.sigma2_d_dark;

    rep.snl = rep.mean_s + rep.mean_i;
    if (!(rep.snl > 0.0))
        throw NumericalError("noise_reduction: nonpositive shot-noise level, cannot normalize");
    rep.r_linear = rep.sigma2_d / rep.snl;
    if (rep.r_linear > 0.0) rep.r_db = 10.0 * std::log10(rep.r_linear);

    // Var of the sample variance: (m4 - var^2)/K; dark part 2*sigma^4/K_dark.
    const double m4 = central_moment(d, 4);
    double var_of_var = (m4 - rep.sigma2_d_raw * rep.sigma2_d_raw) / static_cast<double>(count);
    if (opts.corrected && series.dark->count > 1) {
        const double dv = rep.sigma2_d_dark;
        var_of_var += 2.0 * dv * dv / static_cast<double>(series.dark->count);
    }
    rep.r_stderr = std::sqrt(std::max(var_of_var, 0.0)) / rep.snl;

    rep.fano_s = rep.mean_s != 0.0 ? (rep.var_s_raw - dark_var_s) / rep.mean_s
                                   : std::numeric_limits<double>::quiet_NaN();
    rep.fano_i = rep.mean_i != 0.0 ? (rep.var_i_raw - dark_var_i) / rep.mean_i
                                   : std::numeric_limits<double>::quiet_NaN();

    rep.gamma = gamma_profile(series, opts.j_max, opts.corrected);
    rep.floor_r = opts.floor_r;
    rep.classification = classify(rep.r_linear, opts.floor_r, rep.r_stderr, opts.z);
    return rep;
}

// Closed selection window on the signal record.
struct Window {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    void validate() const {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi)
            throw ParameterError("window: need lo <= hi");
    }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct ConditionalResult {
    std::uint64_t retained = 0;
    double success_probability = 0.0;
    double mean_conditional = 0.0;     // <m_i | m_s in window>
    double var_conditional = 0.0;
    double fano_conditional = 0.0;     // dark-corrected if requested
    double fano_marginal = 0.0;        // same correction, full series
    double fano_stderr = 0.0;
    Histogram histogram;               // idler counts of retained shots
};

// Post-selects idler shots by a window on the signal record. The conditional
// Fano uses the idler dark variance, like the marginal one.
inline ConditionalResult conditional_distribution(const ShotSeries& series,
                                                  const Window& window,
                                                  const AnalysisOptions& opts = {}) {
    window.validate();
    if (series.size() == 0) throw DataError("conditional_distribution: empty series");
    if (opts.corrected) detail::require_dark(series);

    std::vector<double> kept;
    kept.reserve(series.size());
    for (const auto& shot : series.shots)
        if (window.contains(shot.m_s)) kept.push_back(shot.m_i);
    if (kept.empty())
        throw DataError("conditional_distribution: no shots fall inside the window");

    const double dark_var_i = opts.corrected ? series.dark->var_i : 0.0;

    ConditionalResult res;
    res.retained = kept.size();
    res.success_probability = static_cast<double>(kept.size()) / static_cast<double>(series.size());
    res.mean_conditional = mean(kept);
    res.var_conditional = kept.size() > 1 ? variance(kept) : 0.0;
    if (res.mean_conditional != 0.0)
        res.fano_conditional = (res.var_conditional - dark_var_i) / res.mean_conditional;
    else
        res.fano_conditional = std::numeric_limits<double>::quiet_NaN();

    const auto all_i = column_i(series.shots);
    const double marg_mean = mean(all_i);
    res.fano_marginal = marg_mean != 0.0 ? (variance(all_i) - dark_var_i) / marg_mean
                                         : std::numeric_limits<double>::quiet_NaN();

    if (kept.size() > 1 && res.mean_conditional != 0.0) {
        const double m4 = central_moment(kept, 4);
        const double vv = (m4 - res.var_conditional * res.var_conditional)
                        / static_cast<double>(kept.size());
        res.fano_stderr = std::sqrt(std::max(vv, 0.0)) / std::fabs(res.mean_conditional);
    }

    res.histogram = make_histogram(kept, opts.bin_width, -0.5 * opts.bin_width);
    return res;
}

enum class Arm { Signal, Idler };

inline double marginal_fano(const ShotSeries& series, Arm arm, bool corrected) {
    if (series.size() < 2) throw DataError("marginal_fano: need at least 2 shots");
    if (corrected) detail::require_dark(series);
    const auto col = arm == Arm::Signal ? column_s(series.shots) : column_i(series.shots);
    const double dark_var = corrected
        ? (arm == Arm::Signal ? series.dark->var_s : series.dark->var_i)
        : 0.0;
    const double m = mean(col);
    if (m == 0.0) throw NumericalError("marginal_fano: zero mean, Fano undefined");
    return (variance(col) - dark_var) / m;
}

} // namespace twinbeam
