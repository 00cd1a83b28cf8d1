#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "twinbeam/errors.hpp"

namespace twinbeam {

// Pairwise (fixed-tree) summation: deterministic for a fixed element order
// regardless of how the reduction is scheduled, and far more accurate than
// a running sum for long series.
inline double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 16) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double mean(std::span<const double> values) {
    if (values.empty()) throw ParameterError("mean: empty series");
    return pairwise_sum(values) / static_cast<double>(values.size());
}

// Population variance, sigma^2 = <x^2> - <x>^2, computed two-pass.
inline double variance(std::span<const double> values) {
    if (values.size() < 2) throw ParameterError("variance: need at least 2 samples");
    const double mu = mean(values);
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mu;
        sq[i] = d * d;
    }
    return pairwise_sum(sq) / static_cast<double>(values.size());
}

inline double covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ParameterError("covariance: length mismatch");
    if (xs.size() < 2) throw ParameterError("covariance: need at least 2 samples");
    const double mx = mean(xs);
    const double my = mean(ys);
    std::vector<double> prod(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        prod[i] = (xs[i] - mx) * (ys[i] - my);
    return pairwise_sum(prod) / static_cast<double>(xs.size());
}

// Central moment of given order (two-pass, pairwise).
inline double central_moment(std::span<const double> values, int order) {
    if (values.empty()) throw ParameterError("central_moment: empty series");
    const double mu = mean(values);
    std::vector<double> pw(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        pw[i] = std::pow(values[i] - mu, order);
    return pairwise_sum(pw) / static_cast<double>(values.size());
}

// Binned counts over real-valued samples; bin b covers
// [origin + b*width, origin + (b+1)*width).
struct Histogram {
    double bin_width = 1.0;
    double origin = 0.0;
    std::int64_t first_bin = 0;          // index of counts.front()
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    double bin_left(std::size_t i) const {
        return origin + static_cast<double>(first_bin + static_cast<std::int64_t>(i)) * bin_width;
    }
    double probability(std::size_t i) const {
        return total == 0 ? 0.0 : static_cast<double>(counts[i]) / static_cast<double>(total);
    }
};

inline Histogram make_histogram(std::span<const double> values, double bin_width, double origin = 0.0) {
    if (!(bin_width > 0.0)) throw ParameterError("histogram: bin width must be positive");
    Histogram h;
    h.bin_width = bin_width;
    h.origin = origin;
    if (values.empty()) return h;

    std::map<std::int64_t, std::uint64_t> bins;
    for (double v : values) {
        const auto b = static_cast<std::int64_t>(std::floor((v - origin) / bin_width));
        ++bins[b];
    }
    h.first_bin = bins.begin()->first;
    const std::int64_t last = bins.rbegin()->first;
    h.counts.assign(static_cast<std::size_t>(last - h.first_bin + 1), 0);
    for (const auto& [b, c] : bins)
        h.counts[static_cast<std::size_t>(b - h.first_bin)] = c;
    h.total = values.size();
    return h;
}

} // namespace twinbeam
