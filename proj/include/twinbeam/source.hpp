#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "twinbeam/errors.hpp"
#include "twinbeam/rng.hpp"

namespace twinbeam {

enum class SourceKind {
    TwinSpontaneous,    // pairwise emission: n_s = n_i, multithermal law
    CoherentPair,       // two independent Poisson beams of equal mean
    IndependentThermal, // two independent multithermal beams
};

// Photon-number law of the emitter. TwinSpontaneous draws one multithermal
// variate per pulse (mu equal thermal modes, mean nbar each) and feeds it to
// both arms, so <n> = mu*nbar and Var(n) = mu*nbar*(1+nbar) = <n>(1+<n>/mu).
struct SourceModel {
    std::int64_t mu = 1;
    double nbar = 0.0;
    SourceKind kind = SourceKind::TwinSpontaneous;

    void validate() const {
        if (mu < 1) throw ParameterError("source: mu must be a positive integer");
        if (!(nbar >= 0.0) || !std::isfinite(nbar))
            throw ParameterError("source: nbar must be a finite nonnegative real");
    }

    double mean_photons() const { return static_cast<double>(mu) * nbar; }
    double var_photons() const {
        const double a = mean_photons();
        switch (kind) {
        case SourceKind::CoherentPair: return a;
        default: return a * (1.0 + nbar);
        }
    }
};

struct PhotonShot {
    std::int64_t n_s = 0;
    std::int64_t n_i = 0;
};

namespace detail {

// Negative binomial NB(mu, nbar) sampled as a gamma-mixed Poisson:
// Lambda ~ Gamma(shape=mu, scale=nbar), n | Lambda ~ Poisson(Lambda).
// Exact for the multithermal law and O(1) in mu, unlike summing geometrics.
inline std::int64_t sample_multithermal(std::int64_t mu, double nbar, Xoshiro256& rng) {
    if (nbar <= 0.0) return 0;
    std::gamma_distribution<double> gamma(static_cast<double>(mu), nbar);
    const double lambda = gamma(rng);
    if (lambda <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> pois(lambda);
    return pois(rng);
}

inline std::int64_t sample_poisson(double mean, Xoshiro256& rng) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> pois(mean);
    return pois(rng);
}

} // namespace detail

inline PhotonShot sample_shot(const SourceModel& model, Xoshiro256& rng) {
    PhotonShot shot;
    switch (model.kind) {
    case SourceKind::TwinSpontaneous: {
        const std::int64_t n = detail::sample_multithermal(model.mu, model.nbar, rng);
        shot.n_s = n;
        shot.n_i = n;
        break;
    }
    case SourceKind::CoherentPair: {
        const double a = model.mean_photons();
        shot.n_s = detail::sample_poisson(a, rng);
        shot.n_i = detail::sample_poisson(a, rng);
        break;
    }
    case SourceKind::IndependentThermal: {
        shot.n_s = detail::sample_multithermal(model.mu, model.nbar, rng);
        shot.n_i = detail::sample_multithermal(model.mu, model.nbar, rng);
        break;
    }
    }
    return shot;
}

// Shot i depends only on (seed, i): generation may fan out across threads
// by index range and still merge into the same sequence.
inline std::vector<PhotonShot> sample_shots(const SourceModel& model,
                                            std::uint64_t count,
                                            std::uint64_t seed) {
    model.validate();
    if (count == 0) throw ParameterError("sample_shots: count must be >= 1");
    std::vector<PhotonShot> shots(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Xoshiro256 rng = shot_rng(seed, i, RngStage::Source);
        shots[i] = sample_shot(model, rng);
    }
    return shots;
}

// Negative-binomial pmf of one arm, truncated at n_max, in log space so that
// large mu and nbar do not overflow. CoherentPair yields the Poisson pmf.
inline std::vector<double> photon_pmf(const SourceModel& model, std::int64_t n_max) {
    model.validate();
    if (n_max < 0) throw ParameterError("photon_pmf: n_max must be >= 0");
    std::vector<double> pmf(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (model.nbar == 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (model.kind == SourceKind::CoherentPair) {
        const double a = model.mean_photons();
        const double log_a = std::log(a);
        for (std::int64_t n = 0; n <= n_max; ++n)
            pmf[static_cast<std::size_t>(n)] =
                std::exp(static_cast<double>(n) * log_a - a - std::lgamma(static_cast<double>(n) + 1.0));
        return pmf;
    }
    const double mu = static_cast<double>(model.mu);
    const double log_p = std::log(model.nbar / (1.0 + model.nbar));
    const double log_q = -std::log1p(model.nbar);
    const double lg_mu = std::lgamma(mu);
    for (std::int64_t n = 0; n <= n_max; ++n) {
        const double dn = static_cast<double>(n);
        const double log_pmf = std::lgamma(dn + mu) - lg_mu - std::lgamma(dn + 1.0)
                             + dn * log_p + mu * log_q;
        pmf[static_cast<std::size_t>(n)] = std::exp(log_pmf);
    }
    return pmf;
}

} // namespace twinbeam
