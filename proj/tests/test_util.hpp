#pragma once

// Shared helpers for the statistical test suites. Monte Carlo assertions use
// frozen seeds, so every band below is deterministic; widths are quoted as
// multiples of the estimator's standard error at the chosen sample size.

#include <cmath>
#include <cstdint>
#include <vector>

#include "twinbeam/source.hpp"
#include "twinbeam/stats.hpp"

namespace tbtest {

inline std::vector<double> photon_column_s(const std::vector<twinbeam::PhotonShot>& shots) {
    std::vector<double> out;
    out.reserve(shots.size());
    for (const auto& s : shots) out.push_back(static_cast<double>(s.n_s));
    return out;
}

inline std::vector<double> photon_column_i(const std::vector<twinbeam::PhotonShot>& shots) {
    std::vector<double> out;
    out.reserve(shots.size());
    for (const auto& s : shots) out.push_back(static_cast<double>(s.n_i));
    return out;
}

// Standard error of the sample variance, sqrt((m4 - var^2)/K), evaluated
// from the sample itself so bands scale with the actual law under test.
inline double variance_stderr(const std::vector<double>& xs) {
    const double m4 = twinbeam::central_moment(xs, 4);
    const double v = twinbeam::variance(xs);
    return std::sqrt((m4 - v * v) / static_cast<double>(xs.size()));
}

inline double mean_stderr(const std::vector<double>& xs) {
    return std::sqrt(twinbeam::variance(xs) / static_cast<double>(xs.size()));
}

} // namespace tbtest
