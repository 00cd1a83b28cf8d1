#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "twinbeam/analysis.hpp"
#include "twinbeam/collection.hpp"
#include "twinbeam/detection.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/source.hpp"

namespace twinbeam {

struct RunConfig {
    std::uint64_t count = 0;      // pulses to simulate
    std::uint64_t dark_count = 0; // pulses of the no-light companion run
};

struct SweepConfig {
    std::vector<double> intensities;
    PumpMap map;
    std::uint64_t count = 20000;     // shots per sweep point
    std::uint64_t dark_count = 0;
};

// One JSON document drives everything; CLI flags override single fields.
struct ExperimentConfig {
    SourceModel source;
    DetectorArm arm_s;
    DetectorArm arm_i;
    CollectionModel collection;
    RunConfig run;
    AnalysisOptions analysis;
    std::optional<Window> window;
    std::optional<SweepConfig> sweep;

    // Balanced-arm nonclassicality floor 1 - eta, generalized to unequal
    // arms through the harmonic mean (the matched-collection minimum of R).
    double floor_r() const {
        const double s = arm_s.eta + arm_i.eta;
        if (!(s > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        return 1.0 - 2.0 * arm_s.eta * arm_i.eta / s;
    }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) { known = true; break; }
        if (!known)
            throw ParameterError("config: unknown key '" + key + "' in " + context);
    }
}

inline double num_field(const json& obj, const char* key, double fallback, const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw ParameterError("config: " + context + "." + key + " must be a number");
    return v.get<double>();
}

inline std::int64_t int_field(const json& obj, const char* key, std::int64_t fallback,
                              const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ParameterError("config: " + context + "." + key + " must be an integer");
    return v.get<std::int64_t>();
}

inline bool bool_field(const json& obj, const char* key, bool fallback, const std::string& context) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean())
        throw ParameterError("config: " + context + "." + key + " must be a boolean");
    return v.get<bool>();
}

inline SourceKind parse_kind(const std::string& s) {
    if (s == "twin_spontaneous") return SourceKind::TwinSpontaneous;
    if (s == "coherent_pair") return SourceKind::CoherentPair;
    if (s == "independent_thermal") return SourceKind::IndependentThermal;
    throw ParameterError("config: source.kind must be one of "
                         "twin_spontaneous, coherent_pair, independent_thermal (got '" + s + "')");
}

inline DetectorArm parse_arm(const json& obj, const std::string& context) {
    reject_unknown_keys(obj, {"eta", "dark_sigma", "dark_mean", "gain_uV_per_electron"}, context);
    DetectorArm arm;
    arm.eta = num_field(obj, "eta", arm.eta, context);
    arm.dark_sigma = num_field(obj, "dark_sigma", arm.dark_sigma, context);
    arm.dark_mean = num_field(obj, "dark_mean", arm.dark_mean, context);
    arm.gain_uV_per_electron = num_field(obj, "gain_uV_per_electron", arm.gain_uV_per_electron, context);
    arm.validate();
    return arm;
}

inline Window parse_window(const json& v, const std::string& context) {
    if (!v.is_array() || v.size() != 2)
        throw ParameterError("config: " + context + " must be a 2-element array [lo, hi]");
    Window w;
    if (!v[0].is_null()) {
        if (!v[0].is_number()) throw ParameterError("config: " + context + "[0] must be a number or null");
        w.lo = v[0].get<double>();
    }
    if (!v[1].is_null()) {
        if (!v[1].is_number()) throw ParameterError("config: " + context + "[1] must be a number or null");
        w.hi = v[1].get<double>();
    }
    w.validate();
    return w;
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    detail::json doc;
    try {
        doc = detail::json::parse(text);
    } catch (const std::exception& e) {
        throw ParameterError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParameterError("config: top level must be a JSON object");
    detail::reject_unknown_keys(doc, {"source", "arms", "collection", "run", "analysis", "sweep"},
                                "top level");

    ExperimentConfig cfg;

    if (doc.contains("source")) {
        const auto& s = doc.at("source");
        detail::reject_unknown_keys(s, {"mu", "nbar", "kind"}, "source");
        cfg.source.mu = detail::int_field(s, "mu", cfg.source.mu, "source");
        cfg.source.nbar = detail::num_field(s, "nbar", cfg.source.nbar, "source");
        if (s.contains("kind")) {
            if (!s.at("kind").is_string()) throw ParameterError("config: source.kind must be a string");
            cfg.source.kind = detail::parse_kind(s.at("kind").get<std::string>());
        }
        cfg.source.validate();
    }

    if (doc.contains("arms")) {
        const auto& a = doc.at("arms");
        detail::reject_unknown_keys(a, {"signal", "idler"}, "arms");
        if (a.contains("signal")) cfg.arm_s = detail::parse_arm(a.at("signal"), "arms.signal");
        if (a.contains("idler")) cfg.arm_i = detail::parse_arm(a.at("idler"), "arms.idler");
    }

    if (doc.contains("collection")) {
        const auto& c = doc.at("collection");
        detail::reject_unknown_keys(c, {"t_s", "t_i", "whole_modes", "bg_s", "bg_i"}, "collection");
        cfg.collection.t_s = detail::num_field(c, "t_s", cfg.collection.t_s, "collection");
        cfg.collection.t_i = detail::num_field(c, "t_i", cfg.collection.t_i, "collection");
        cfg.collection.whole_modes =
            detail::int_field(c, "whole_modes", cfg.collection.whole_modes, "collection");
        cfg.collection.bg_s = detail::num_field(c, "bg_s", cfg.collection.bg_s, "collection");
        cfg.collection.bg_i = detail::num_field(c, "bg_i", cfg.collection.bg_i, "collection");
        cfg.collection.validate();
    }

    if (doc.contains("run")) {
        const auto& r = doc.at("run");
        detail::reject_unknown_keys(r, {"count", "dark_count"}, "run");
        const std::int64_t count = detail::int_field(r, "count", 0, "run");
        const std::int64_t dark = detail::int_field(r, "dark_count", 0, "run");
        if (count < 0 || dark < 0) throw ParameterError("config: run counts must be >= 0");
        cfg.run.count = static_cast<std::uint64_t>(count);
        cfg.run.dark_count = static_cast<std::uint64_t>(dark);
    }

    if (doc.contains("analysis")) {
        const auto& an = doc.at("analysis");
        detail::reject_unknown_keys(an, {"corrected", "j_max", "bin_width", "window"}, "analysis");
        cfg.analysis.corrected = detail::bool_field(an, "corrected", cfg.analysis.corrected, "analysis");
        cfg.analysis.j_max = detail::int_field(an, "j_max", cfg.analysis.j_max, "analysis");
        if (cfg.analysis.j_max < 0) throw ParameterError("config: analysis.j_max must be >= 0");
        cfg.analysis.bin_width = detail::num_field(an, "bin_width", cfg.analysis.bin_width, "analysis");
        if (!(cfg.analysis.bin_width > 0.0))
            throw ParameterError("config: analysis.bin_width must be positive");
        if (an.contains("window"))
            cfg.window = detail::parse_window(an.at("window"), "analysis.window");
    }

    if (doc.contains("sweep")) {
        const auto& sw = doc.at("sweep");
        detail::reject_unknown_keys(sw,
            {"intensities", "rho_ref", "area_exponent", "nbar_exponent", "mismatch_exponent",
             "count", "dark_count"}, "sweep");
        SweepConfig sc;
        if (!sw.contains("intensities") || !sw.at("intensities").is_array())
            throw ParameterError("config: sweep.intensities must be an array of numbers");
        for (const auto& v : sw.at("intensities")) {
            if (!v.is_number()) throw ParameterError("config: sweep.intensities entries must be numbers");
            sc.intensities.push_back(v.get<double>());
        }
        sc.map.rho_ref = detail::num_field(sw, "rho_ref", sc.map.rho_ref, "sweep");
        sc.map.area_exponent = detail::num_field(sw, "area_exponent", sc.map.area_exponent, "sweep");
        sc.map.nbar_exponent = detail::num_field(sw, "nbar_exponent", sc.map.nbar_exponent, "sweep");
        sc.map.mismatch_exponent =
            detail::num_field(sw, "mismatch_exponent", sc.map.mismatch_exponent, "sweep");
        sc.map.validate();
        const std::int64_t count = detail::int_field(sw, "count", static_cast<std::int64_t>(sc.count), "sweep");
        const std::int64_t dark = detail::int_field(sw, "dark_count", 0, "sweep");
        if (count < 1) throw ParameterError("config: sweep.count must be >= 1");
        if (dark < 0) throw ParameterError("config: sweep.dark_count must be >= 0");
        sc.count = static_cast<std::uint64_t>(count);
        sc.dark_count = static_cast<std::uint64_t>(dark);
        cfg.sweep = std::move(sc);
    }

    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

} // namespace twinbeam
