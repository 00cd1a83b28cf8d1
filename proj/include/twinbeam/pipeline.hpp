#pragma once

#include <cstdint>
#include <vector>

#include "twinbeam/collection.hpp"
#include "twinbeam/config.hpp"
#include "twinbeam/detection.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/series.hpp"
#include "twinbeam/source.hpp"

namespace twinbeam {

// Full chain for one pulse: emission, collection, detection. Each stage owns
// its own substream of (seed, shot index), so any contiguous index range can
// be generated independently and the merged record is identical to a serial
// run.
inline DetectedShot simulate_shot(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t index) {
    Xoshiro256 rng_source = shot_rng(seed, index, RngStage::Source);
    PhotonShot shot = sample_shot(cfg.source, rng_source);
    if (!cfg.collection.is_identity()) {
        Xoshiro256 rng_coll = shot_rng(seed, index, RngStage::Collection);
        shot = apply_collection(shot, cfg.source, cfg.collection, rng_coll);
    }
    Xoshiro256 rng_det = shot_rng(seed, index, RngStage::Detection);
    return detect_shot(shot, cfg.arm_s, cfg.arm_i, rng_det);
}

struct SimulationResult {
    std::vector<DetectedShot> shots;
    std::vector<DetectedShot> dark;
};

inline SimulationResult simulate_series(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.source.validate();
    cfg.collection.validate();
    cfg.arm_s.validate();
    cfg.arm_i.validate();
    if (cfg.run.count == 0)
        throw ParameterError("simulate: run.count must be >= 1");

    SimulationResult res;
    res.shots.resize(cfg.run.count);
    for (std::uint64_t i = 0; i < cfg.run.count; ++i)
        res.shots[i] = simulate_shot(cfg, seed, i);
    if (cfg.run.dark_count > 0)
        res.dark = dark_run(cfg.arm_s, cfg.arm_i, cfg.run.dark_count, seed);
    return res;
}

inline ShotSeries to_series(const SimulationResult& sim) {
    ShotSeries series;
    series.shots = sim.shots;
    if (sim.dark.size() >= 2)
        series.dark = compute_dark_stats(sim.dark);
    return series;
}

} // namespace twinbeam
