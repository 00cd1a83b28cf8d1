#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "twinbeam/errors.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/source.hpp"

namespace twinbeam {

// One detection chain: binomial thinning at efficiency eta followed by
// additive Gaussian electronic noise, plus the gain calibration that maps
// electron counts to the digitizer's microvolt scale.
struct DetectorArm {
    double eta = 1.0;
    double dark_sigma = 0.0;            // r.m.s. electronic noise, electrons
    double dark_mean = 0.0;             // residual offset, electrons
    double gain_uV_per_electron = 1.0;

    void validate() const {
        if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("detector: eta must lie in [0,1]");
        if (!(dark_sigma >= 0.0)) throw ParameterError("detector: dark_sigma must be >= 0");
        if (!std::isfinite(dark_mean)) throw ParameterError("detector: dark_mean must be finite");
        if (!(gain_uV_per_electron > 0.0)) throw ParameterError("detector: gain must be positive");
    }

    double to_microvolts(double electrons) const { return electrons * gain_uV_per_electron; }
    double to_electrons(double microvolts) const { return microvolts / gain_uV_per_electron; }
};

// Electron-unit record of one pulse. Real-valued: analog integration plus
// electronic noise makes calibrated counts non-integer and possibly negative.
struct DetectedShot {
    double m_s = 0.0;
    double m_i = 0.0;
};

// m ~ Binomial(n, eta): each photon independently yields a photoelectron.
inline std::int64_t thin(std::int64_t n, double eta, Xoshiro256& rng) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("thin: eta must lie in [0,1]");
    if (n < 0) throw ParameterError("thin: n must be >= 0");
    if (n == 0 || eta == 0.0) return 0;
    if (eta == 1.0) return n;
    std::binomial_distribution<std::int64_t> bin(n, eta);
    return bin(rng);
}

namespace detail {

inline double add_electronic_noise(double m, const DetectorArm& arm, Xoshiro256& rng) {
    if (arm.dark_sigma > 0.0) {
        std::normal_distribution<double> gauss(arm.dark_mean, arm.dark_sigma);
        return m + gauss(rng);
    }
    return m + arm.dark_mean;
}

} // namespace detail

// Signal arm consumes randomness before the idler arm; the order is part of
// the reproducibility contract.
inline DetectedShot detect_shot(const PhotonShot& shot,
                                const DetectorArm& arm_s,
                                const DetectorArm& arm_i,
                                Xoshiro256& rng) {
    DetectedShot out;
    out.m_s = detail::add_electronic_noise(
        static_cast<double>(thin(shot.n_s, arm_s.eta, rng)), arm_s, rng);
    out.m_i = detail::add_electronic_noise(
        static_cast<double>(thin(shot.n_i, arm_i.eta, rng)), arm_i, rng);
    return out;
}

// No-light companion run: pure electronic noise on both arms.
inline std::vector<DetectedShot> dark_run(const DetectorArm& arm_s,
                                          const DetectorArm& arm_i,
                                          std::uint64_t count,
                                          std::uint64_t seed) {
    arm_s.validate();
    arm_i.validate();
    if (count == 0) throw ParameterError("dark_run: count must be >= 1");
    std::vector<DetectedShot> out(count);
    const PhotonShot vacuum{};
    for (std::uint64_t i = 0; i < count; ++i) {
        Xoshiro256 rng = shot_rng(seed, i, RngStage::Dark);
        out[i] = detect_shot(vacuum, arm_s, arm_i, rng);
    }
    return out;
}

// Exact pmf transform P(m) = sum_n C(n,m) eta^m (1-eta)^(n-m) P(n).
// The binomial kernel for each n is built by the ratio recurrence
// B(m+1) = B(m) * (n-m)/(m+1) * eta/(1-eta), which is stable for eta in (0,1).
inline std::vector<double> detect_pmf(const std::vector<double>& pmf, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("detect_pmf: eta must lie in [0,1]");
    if (pmf.empty()) throw ParameterError("detect_pmf: empty input pmf");
    const std::size_t size = pmf.size();
    if (eta == 1.0) return pmf;
    std::vector<double> out(size, 0.0);
    if (eta == 0.0) {
        double mass = 0.0;
        for (double p : pmf) mass += p;
        out[0] = mass;
        return out;
    }
    const double ratio = eta / (1.0 - eta);
    std::vector<double> kernel(size);
    for (std::size_t n = 0; n < size; ++n) {
        if (pmf[n] == 0.0) continue;
        kernel[0] = std::pow(1.0 - eta, static_cast<double>(n));
        for (std::size_t m = 0; m < n; ++m)
            kernel[m + 1] = kernel[m] * ratio
                          * static_cast<double>(n - m) / static_cast<double>(m + 1);
        for (std::size_t m = 0; m <= n; ++m)
            out[m] += pmf[n] * kernel[m];
    }
    return out;
}

} // namespace twinbeam
