#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "twinbeam/detection.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/source.hpp"

namespace twinbeam {

// Pinhole/coherence-area matching. The collected light decomposes into
//   whole_modes coherence areas fully inside both pinholes (each an
//   independent copy of the source law, perfectly shared between arms),
//   one edge area (the incoming shot) clipped per arm by independent
//   binomial transmissions t_s, t_i on the same photon number,
//   and uncorrelated Poisson background of mean bg_j per arm.
// The defaults pass the source shot through untouched.
struct CollectionModel {
    double t_s = 1.0;
    double t_i = 1.0;
    std::int64_t whole_modes = 0;
    double bg_s = 0.0;
    double bg_i = 0.0;

    void validate() const {
        if (!(t_s >= 0.0 && t_s <= 1.0) || !(t_i >= 0.0 && t_i <= 1.0))
            throw ParameterError("collection: transmissions must lie in [0,1]");
        if (whole_modes < 0) throw ParameterError("collection: whole_modes must be >= 0");
        if (!(bg_s >= 0.0) || !(bg_i >= 0.0))
            throw ParameterError("collection: backgrounds must be >= 0");
    }

    bool is_identity() const {
        return t_s == 1.0 && t_i == 1.0 && whole_modes == 0 && bg_s == 0.0 && bg_i == 0.0;
    }
};

// Whole modes stay perfectly correlated; only the edge clipping and the
// background decorrelate the arms. Draw order (whole, edge_s, edge_i,
// bg_s, bg_i) is part of the reproducibility contract.
inline PhotonShot apply_collection(const PhotonShot& shot,
                                   const SourceModel& source,
                                   const CollectionModel& model,
                                   Xoshiro256& rng) {
    if (model.is_identity()) return shot;

    std::int64_t whole = 0;
    if (model.whole_modes > 0)
        whole = detail::sample_multithermal(model.whole_modes * source.mu, source.nbar, rng);

    PhotonShot out;
    out.n_s = whole + thin(shot.n_s, model.t_s, rng) + detail::sample_poisson(model.bg_s, rng);
    out.n_i = whole + thin(shot.n_i, model.t_i, rng) + detail::sample_poisson(model.bg_i, rng);
    return out;
}

// How a pump-intensity scan maps onto collection and source settings.
// The coherence-area scale grows as I^area_exponent, so the pinhole-to-area
// ratio is rho(I) = rho_ref / I^area_exponent; the per-mode mean photon
// number grows as nbar_ref * I^nbar_exponent. Both exponents are knobs, not
// claims about the optics. When rho < 1 the pinhole clips a single area and
// the dichromatic arms clip it unequally: t_s = rho, t_i = rho^(1+mismatch).
struct PumpMap {
    double rho_ref = 1.0;
    double area_exponent = 1.0;
    double nbar_exponent = 2.0;
    double mismatch_exponent = 0.35;

    void validate() const {
        if (!(rho_ref > 0.0)) throw ParameterError("pump map: rho_ref must be positive");
        if (!(area_exponent > 0.0)) throw ParameterError("pump map: area exponent must be positive");
        if (!(nbar_exponent >= 0.0)) throw ParameterError("pump map: nbar exponent must be >= 0");
        if (!(mismatch_exponent >= 0.0)) throw ParameterError("pump map: mismatch exponent must be >= 0");
    }
};

struct PumpSweepPoint {
    double pump_intensity = 0.0;
    SourceModel source;
    CollectionModel collection;
    DetectorArm arm_s;
    DetectorArm arm_i;
};

// rho >= 1: floor(rho) whole areas fit inside the pinholes, the edge passes
// fully, and the fractional remainder enters as uncorrelated admixture of
// mean frac(rho) * <n>(I) per arm. rho < 1: no whole area fits and each arm
// clips the single shared area. At rho = 1 exactly this reduces to ideal
// matching (whole_modes = 1, t = 1, bg = 0).
inline std::vector<PumpSweepPoint> sweep_pump(const std::vector<double>& intensities,
                                              const PumpMap& map,
                                              const SourceModel& base,
                                              const DetectorArm& arm_s,
                                              const DetectorArm& arm_i) {
    map.validate();
    base.validate();
    arm_s.validate();
    arm_i.validate();
    if (intensities.empty()) throw ParameterError("sweep_pump: empty intensity list");

    std::vector<PumpSweepPoint> points;
    points.reserve(intensities.size());
    for (double intensity : intensities) {
        if (!(intensity > 0.0))
            throw ParameterError("sweep_pump: pump intensities must be positive");
        PumpSweepPoint pt;
        pt.pump_intensity = intensity;
        pt.source = base;
        pt.source.nbar = base.nbar * std::pow(intensity, map.nbar_exponent);
        pt.arm_s = arm_s;
        pt.arm_i = arm_i;

        const double rho = map.rho_ref / std::pow(intensity, map.area_exponent);
        CollectionModel coll;
        if (rho >= 1.0) {
            const double whole = std::floor(rho);
            const double frac = rho - whole;
            coll.whole_modes = static_cast<std::int64_t>(whole);
            coll.t_s = 1.0;
            coll.t_i = 1.0;
            coll.bg_s = frac * pt.source.mean_photons();
            coll.bg_i = coll.bg_s;
        } else {
            coll.whole_modes = 0;
            coll.t_s = rho;
            coll.t_i = std::pow(rho, 1.0 + map.mismatch_exponent);
        }
        pt.collection = coll;
        points.push_back(pt);
    }
    return points;
}

} // namespace twinbeam
