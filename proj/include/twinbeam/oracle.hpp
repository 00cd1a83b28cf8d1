#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "twinbeam/collection.hpp"
#include "twinbeam/detection.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/source.hpp"

namespace twinbeam {

// Exact first/second moments of the detected records, electronic noise
// excluded (the estimand of the dark-corrected estimators).
struct MomentSet {
    double mean_n = 0.0;   // single coherence area, pre-detection
    double var_n = 0.0;
    double mean_m_s = 0.0;
    double mean_m_i = 0.0;
    double var_m_s = 0.0;
    double var_m_i = 0.0;
    double cov_m = 0.0;
    double sigma2_d = 0.0; // Var(m_s - m_i)
    double snl = 0.0;      // <m_s> + <m_i>
    double r = 0.0;        // sigma2_d / snl
    double fano_s = 0.0;
    double fano_i = 0.0;
};

// Builds the moments from the thinning algebra: a binomial thinning at p maps
// (mean, var) to (p*mean, p^2*var + p(1-p)*mean) and two thinnings of a
// shared variate have covariance p_s*p_i*var. Whole areas are always
// multithermal twin patches; the edge area follows the source kind; the
// Poisson background thins to Poisson.
inline MomentSet twin_moments(const SourceModel& source,
                              const CollectionModel& coll,
                              const DetectorArm& arm_s,
                              const DetectorArm& arm_i) {
    source.validate();
    coll.validate();
    arm_s.validate();
    arm_i.validate();

    const double a = source.mean_photons();
    const double v_edge = source.var_photons();
    const double v_th = a * (1.0 + source.nbar);
    const double w = static_cast<double>(coll.whole_modes);
    const double eta_s = arm_s.eta;
    const double eta_i = arm_i.eta;
    const double tau_s = eta_s * coll.t_s;
    const double tau_i = eta_i * coll.t_i;

    MomentSet ms;
    ms.mean_n = a;
    ms.var_n = v_edge;

    ms.mean_m_s = eta_s * w * a + tau_s * a + eta_s * coll.bg_s;
    ms.mean_m_i = eta_i * w * a + tau_i * a + eta_i * coll.bg_i;

    ms.var_m_s = eta_s * eta_s * w * v_th + eta_s * (1.0 - eta_s) * w * a
               + tau_s * tau_s * v_edge + tau_s * (1.0 - tau_s) * a
               + eta_s * coll.bg_s;
    ms.var_m_i = eta_i * eta_i * w * v_th + eta_i * (1.0 - eta_i) * w * a
               + tau_i * tau_i * v_edge + tau_i * (1.0 - tau_i) * a
               + eta_i * coll.bg_i;

    ms.cov_m = eta_s * eta_i * w * v_th;
    if (source.kind == SourceKind::TwinSpontaneous)
        ms.cov_m += tau_s * tau_i * v_edge;

    ms.sigma2_d = ms.var_m_s + ms.var_m_i - 2.0 * ms.cov_m;
    ms.snl = ms.mean_m_s + ms.mean_m_i;
    ms.r = ms.snl > 0.0 ? ms.sigma2_d / ms.snl : std::numeric_limits<double>::quiet_NaN();
    ms.fano_s = ms.mean_m_s > 0.0 ? ms.var_m_s / ms.mean_m_s
                                  : std::numeric_limits<double>::quiet_NaN();
    ms.fano_i = ms.mean_m_i > 0.0 ? ms.var_m_i / ms.mean_m_i
                                  : std::numeric_limits<double>::quiet_NaN();
    return ms;
}

struct SeededR {
    double r = 0.0;
    double asymptote = 0.0; // alpha >> 1 limit, 1 - eta + eta/(2 nu2)
};

// Noise reduction of an amplifier seeded by a coherent signal of amplitude
// alpha at gain |nu|^2: R = 1 - eta * (1 + alpha^2 / ((1+alpha^2) 2 nu2))^-1.
// Analytic only; the seeded photon distribution is not sampled.
inline SeededR seeded_R(double eta, double alpha, double nu2) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("seeded_R: eta must lie in [0,1]");
    if (!(alpha >= 0.0)) throw ParameterError("seeded_R: alpha must be >= 0");
    if (!(nu2 > 0.0)) throw ParameterError("seeded_R: nu2 must be positive");
    SeededR out;
    const double frac = alpha * alpha / (1.0 + alpha * alpha);
    out.r = 1.0 - eta / (1.0 + frac / (2.0 * nu2));
    out.asymptote = 1.0 - eta + eta / (2.0 * nu2);
    return out;
}

// Correlation at zero lag for matched collection, from raw ingredients;
// the mode count enters only through var_n, so fractional values are fine.
inline double gamma0_closed_form(double eta_s, double eta_i,
                                 double mean_n, double var_n,
                                 double dark_var_s, double dark_var_i) {
    const double num = eta_s * eta_i * var_n;
    const double den_s = eta_s * eta_s * var_n + eta_s * (1.0 - eta_s) * mean_n + dark_var_s;
    const double den_i = eta_i * eta_i * var_n + eta_i * (1.0 - eta_i) * mean_n + dark_var_i;
    if (!(den_s > 0.0) || !(den_i > 0.0))
        throw NumericalError("gamma0: nonpositive variance denominator");
    return num / std::sqrt(den_s * den_i);
}

// Expected correlation Gamma(0) for matched collection (no clipping, no
// background). Uncorrected adds the electronic-noise variances to the
// denominator; corrected removes them, which is what the estimator's
// dark subtraction targets.
inline double gamma0_expected(const SourceModel& source,
                              const DetectorArm& arm_s,
                              const DetectorArm& arm_i,
                              bool corrected) {
    source.validate();
    arm_s.validate();
    arm_i.validate();
    const double dark_s = corrected ? 0.0 : arm_s.dark_sigma * arm_s.dark_sigma;
    const double dark_i = corrected ? 0.0 : arm_i.dark_sigma * arm_i.dark_sigma;
    return gamma0_closed_form(arm_s.eta, arm_i.eta,
                                      source.mean_photons(), source.var_photons(),
                                      dark_s, dark_i);
}

// General-collection variant assembled from twin_moments output.
inline double gamma0_from_moments(const MomentSet& ms, double dark_var_s, double dark_var_i) {
    const double den_s = ms.var_m_s + dark_var_s;
    const double den_i = ms.var_m_i + dark_var_i;
    if (!(den_s > 0.0) || !(den_i > 0.0))
        throw NumericalError("gamma0: nonpositive variance denominator");
    return ms.cov_m / std::sqrt(den_s * den_i);
}

// Inverts gamma0_expected for the mode count: balanced arms at efficiency
// eta, detected mean mean_m, corrected Gamma(0) = target. The corrected
// correlation ranges over (eta, 1) as mu runs from infinity down to 0, so
// targets outside that interval are unattainable. Bisection per the
// monotone objective; no derivative needed.
inline double fit_mode_number(double gamma0_corrected, double mean_m, double eta) {
    if (!(gamma0_corrected > 0.0 && gamma0_corrected < 1.0))
        throw ParameterError("fit_mode_number: gamma0 must lie in (0,1)");
    if (!(mean_m > 0.0)) throw ParameterError("fit_mode_number: mean_m must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw ParameterError("fit_mode_number: eta must lie in (0,1]");

    const double mean_n = mean_m / eta;
    const auto gamma_at = [&](double mu) {
        const double var_n = mean_n * (1.0 + mean_n / mu);
        return gamma0_closed_form(eta, eta, mean_n, var_n, 0.0, 0.0);
    };

    double lo = 1e-3;
    double hi = 1e6;
    if (gamma_at(lo) < gamma0_corrected || gamma_at(hi) > gamma0_corrected)
        throw NumericalError("fit_mode_number: target correlation unattainable for mu in [1e-3, 1e6]");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_at(mid) > gamma0_corrected)
            lo = mid; // gamma decreases with mu
        else
            hi = mid;
        if (hi - lo < 1e-9 * std::max(1.0, lo)) break;
    }
    return 0.5 * (lo + hi);
}

// Exact joint law P(m_s, m_i) of the noiseless detected counts, truncated to
// a square table; row index is m_s. Small-instance reference for the
// estimators and the samplers.
struct JointPmf {
    std::size_t side = 0; // counts run 0 .. side-1 on each axis
    std::vector<double> p;

    double at(std::size_t m_s, std::size_t m_i) const { return p[m_s * side + m_i]; }
    double& at(std::size_t m_s, std::size_t m_i) { return p[m_s * side + m_i]; }

    double total_mass() const {
        double t = 0.0;
        for (double x : p) t += x;
        return t;
    }
    std::vector<double> marginal_s() const {
        std::vector<double> out(side, 0.0);
        for (std::size_t a = 0; a < side; ++a)
            for (std::size_t b = 0; b < side; ++b) out[a] += at(a, b);
        return out;
    }
    std::vector<double> marginal_i() const {
        std::vector<double> out(side, 0.0);
        for (std::size_t a = 0; a < side; ++a)
            for (std::size_t b = 0; b < side; ++b) out[b] += at(a, b);
        return out;
    }
    // Idler law conditioned on m_s in [lo, hi]; .second is the window mass.
    std::pair<std::vector<double>, double> conditional_i(std::size_t lo, std::size_t hi) const {
        if (lo > hi || hi >= side) throw ParameterError("conditional_i: bad window");
        std::vector<double> out(side, 0.0);
        double mass = 0.0;
        for (std::size_t a = lo; a <= hi; ++a)
            for (std::size_t b = 0; b < side; ++b) {
                out[b] += at(a, b);
                mass += at(a, b);
            }
        if (mass <= 0.0) throw DataError("conditional_i: empty selection");
        for (double& x : out) x /= mass;
        return {out, mass};
    }
};

inline double pmf_mean(const std::vector<double>& pmf) {
    double m = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
    return m;
}

inline double pmf_variance(const std::vector<double>& pmf) {
    const double m = pmf_mean(pmf);
    double s = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        const double d = static_cast<double>(k) - m;
        s += d * d * pmf[k];
    }
    return s;
}

namespace detail {

inline double lchoose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Binomial(n, p) pmf over m = 0..min(n, cap), each entry evaluated in log
// space so large n cannot underflow the whole row.
inline std::vector<double> binomial_row(std::int64_t n, double p, std::size_t cap) {
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(n), cap);
    std::vector<double> row(top + 1, 0.0);
    if (p <= 0.0) {
        row[0] = 1.0;
        return row;
    }
    if (p >= 1.0) {
        if (static_cast<std::size_t>(n) <= cap) row[static_cast<std::size_t>(n)] = 1.0;
        return row; // mass above cap is dropped; the caller's mass check sees it
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double dn = static_cast<double>(n);
    for (std::size_t m = 0; m <= top; ++m) {
        const double dm = static_cast<double>(m);
        row[m] = std::exp(lchoose(dn, dm) + dm * lp + (dn - dm) * lq);
    }
    return row;
}

// Photon pmf extended until the tail mass drops below eps (or the hard cap).
inline std::vector<double> photon_pmf_covering(const SourceModel& model, double eps) {
    const double sd = std::sqrt(std::max(model.var_photons(), 1.0));
    std::size_t n = static_cast<std::size_t>(model.mean_photons() + 20.0 * sd) + 50;
    constexpr std::size_t hard_cap = 60000;
    for (;;) {
        n = std::min(n, hard_cap);
        std::vector<double> pmf = photon_pmf(model, static_cast<std::int64_t>(n));
        double mass = 0.0;
        for (double x : pmf) mass += x;
        if (1.0 - mass <= eps || n == hard_cap) return pmf;
        n *= 2;
    }
}

struct JointComponent {
    enum class Kind { Delta, Separable, Dense } kind = Kind::Delta;
    std::vector<double> u, v; // separable: u on m_s, v on m_i
    JointPmf table;           // dense
};

// Joint of two thinnings of one shared photon number.
inline JointPmf shared_thinning_table(const std::vector<double>& photon,
                                      double p_s, double p_i, std::size_t side) {
    JointPmf t;
    t.side = side;
    t.p.assign(side * side, 0.0);
    for (std::size_t n = 0; n < photon.size(); ++n) {
        if (photon[n] == 0.0) continue;
        const auto row_s = binomial_row(static_cast<std::int64_t>(n), p_s, side - 1);
        const auto row_i = binomial_row(static_cast<std::int64_t>(n), p_i, side - 1);
        for (std::size_t a = 0; a < row_s.size(); ++a) {
            if (row_s[a] == 0.0) continue;
            const double w = photon[n] * row_s[a];
            for (std::size_t b = 0; b < row_i.size(); ++b)
                t.at(a, b) += w * row_i[b];
        }
    }
    return t;
}

inline JointPmf dense_convolve(const JointPmf& x, const JointPmf& y) {
    JointPmf out;
    out.side = x.side;
    out.p.assign(x.side * x.side, 0.0);
    for (std::size_t a1 = 0; a1 < x.side; ++a1)
        for (std::size_t b1 = 0; b1 < x.side; ++b1) {
            const double w = x.at(a1, b1);
            if (w == 0.0) continue;
            for (std::size_t a2 = 0; a1 + a2 < x.side; ++a2) {
                const double* yrow = &y.p[a2 * y.side];
                double* orow = &out.p[(a1 + a2) * out.side + b1];
                for (std::size_t b2 = 0; b1 + b2 < x.side; ++b2)
                    orow[b2] += w * yrow[b2];
            }
        }
    return out;
}

// Convolve along one axis with a 1-D pmf (separable factors).
inline JointPmf axis_convolve(const JointPmf& x, const std::vector<double>& k, bool on_s) {
    JointPmf out;
    out.side = x.side;
    out.p.assign(x.side * x.side, 0.0);
    for (std::size_t a = 0; a < x.side; ++a)
        for (std::size_t b = 0; b < x.side; ++b) {
            const double w = x.at(a, b);
            if (w == 0.0) continue;
            const std::size_t room = (on_s ? x.side - a : x.side - b);
            const std::size_t top = std::min(k.size(), room);
            for (std::size_t d = 0; d < top; ++d)
                (on_s ? out.at(a + d, b) : out.at(a, b + d)) += w * k[d];
        }
    return out;
}

} // namespace detail

// Exact joint P(m_s, m_i) over 0..n_max per axis, noiseless detection.
// Components: whole areas (shared multithermal, thinned at eta per arm), the
// edge area (thinned at eta*t per arm; shared only for TwinSpontaneous), and
// Poisson background (thinned Poisson). n_max <= 200 keeps the convolution
// cost bounded; more than 1e-9 of probability outside the table is an error
// asking for a larger n_max, never silently dropped.
inline JointPmf joint_pmf_bruteforce(const SourceModel& source,
                                     const CollectionModel& coll,
                                     const DetectorArm& arm_s,
                                     const DetectorArm& arm_i,
                                     std::int64_t n_max) {
    source.validate();
    coll.validate();
    arm_s.validate();
    arm_i.validate();
    if (n_max < 0) throw ParameterError("joint_pmf_bruteforce: n_max must be >= 0");
    if (n_max > 200) throw ParameterError("joint_pmf_bruteforce: n_max above the cost guard of 200");

    constexpr double tail_eps = 1e-14;
    const std::size_t side = static_cast<std::size_t>(n_max) + 1;
    const double tau_s = arm_s.eta * coll.t_s;
    const double tau_i = arm_i.eta * coll.t_i;

    std::vector<detail::JointComponent> parts;

    if (coll.whole_modes > 0 && source.nbar > 0.0) {
        SourceModel whole = source;
        whole.kind = SourceKind::TwinSpontaneous;
        whole.mu = source.mu * coll.whole_modes;
        const auto photon = detail::photon_pmf_covering(whole, tail_eps);
        detail::JointComponent c;
        c.kind = detail::JointComponent::Kind::Dense;
        c.table = detail::shared_thinning_table(photon, arm_s.eta, arm_i.eta, side);
        parts.push_back(std::move(c));
    }

    if (source.nbar > 0.0 && (tau_s > 0.0 || tau_i > 0.0)) {
        detail::JointComponent c;
        if (source.kind == SourceKind::TwinSpontaneous) {
            const auto photon = detail::photon_pmf_covering(source, tail_eps);
            c.kind = detail::JointComponent::Kind::Dense;
            c.table = detail::shared_thinning_table(photon, tau_s, tau_i, side);
        } else {
            // Independent arms: thinning a Poisson or multithermal law just
            // rescales its mean, so each marginal has a closed form.
            SourceModel law_s = source;
            SourceModel law_i = source;
            law_s.nbar = source.nbar * tau_s;
            law_i.nbar = source.nbar * tau_i;
            c.kind = detail::JointComponent::Kind::Separable;
            c.u = detail::photon_pmf_covering(law_s, tail_eps);
            c.v = detail::photon_pmf_covering(law_i, tail_eps);
        }
        parts.push_back(std::move(c));
    }

    if (coll.bg_s > 0.0 || coll.bg_i > 0.0) {
        const auto poisson_vec = [&](double lambda) {
            SourceModel p;
            p.mu = 1;
            p.nbar = lambda;
            p.kind = SourceKind::CoherentPair;
            if (lambda <= 0.0) return std::vector<double>{1.0};
            return detail::photon_pmf_covering(p, tail_eps);
        };
        detail::JointComponent c;
        c.kind = detail::JointComponent::Kind::Separable;
        c.u = poisson_vec(arm_s.eta * coll.bg_s);
        c.v = poisson_vec(arm_i.eta * coll.bg_i);
        parts.push_back(std::move(c));
    }

    JointPmf table;
    table.side = side;
    table.p.assign(side * side, 0.0);
    table.at(0, 0) = 1.0;
    for (const auto& part : parts) {
        switch (part.kind) {
        case detail::JointComponent::Kind::Delta:
            break;
        case detail::JointComponent::Kind::Separable:
            table = detail::axis_convolve(table, part.u, true);
            table = detail::axis_convolve(table, part.v, false);
            break;
        case detail::JointComponent::Kind::Dense:
            table = detail::dense_convolve(table, part.table);
            break;
        }
    }

    const double missing = 1.0 - table.total_mass();
    if (missing > 1e-9)
        throw NumericalError("joint_pmf_bruteforce: truncated mass above 1e-9, increase n_max");
    return table;
}

} // namespace twinbeam
