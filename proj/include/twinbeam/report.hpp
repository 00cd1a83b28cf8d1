#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "twinbeam/analysis.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/stats.hpp"

namespace twinbeam {

// Reports are written by hand rather than through a JSON library so the
// numeric format is pinned: 17 significant digits, the shortest form that
// round-trips a double, suitable for golden-file comparison.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string json_number(double v) {
    if (!std::isfinite(v)) return "null"; // JSON has no NaN/Inf
    return format_double(v);
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

struct ConditionalReportContext {
    const ConditionalResult* result = nullptr;
    Window window;
    // Thinning floor for the dark-corrected conditional Fano; NaN when the
    // efficiency is unknown (bare data files).
    double fano_floor = std::numeric_limits<double>::quiet_NaN();
    double z = 3.0;
};

inline std::string render_report(const AnalysisReport& rep,
                                 const ConditionalReportContext* cond = nullptr) {
    std::string o;
    o.reserve(4096);
    const auto num = [](double v) { return detail::json_number(v); };
    o += "{\n";
    o += "  \"format\": \"twinbeam-report-v1\",\n";
    o += "  \"count\": " + std::to_string(rep.count) + ",\n";
    o += std::string("  \"corrected\": ") + (rep.corrected ? "true" : "false") + ",\n";
    o += "  \"mean_s\": " + num(rep.mean_s) + ",\n";
    o += "  \"mean_i\": " + num(rep.mean_i) + ",\n";
    o += "  \"var_s_raw\": " + num(rep.var_s_raw) + ",\n";
    o += "  \"var_i_raw\": " + num(rep.var_i_raw) + ",\n";
    o += "  \"snl\": " + num(rep.snl) + ",\n";
    o += "  \"sigma2_d_raw\": " + num(rep.sigma2_d_raw) + ",\n";
    o += "  \"sigma2_d_dark\": " + num(rep.sigma2_d_dark) + ",\n";
    o += "  \"sigma2_d\": " + num(rep.sigma2_d) + ",\n";
    o += "  \"r_linear\": " + num(rep.r_linear) + ",\n";
    o += "  \"r_db\": " + (rep.r_db ? num(*rep.r_db) : std::string("null")) + ",\n";
    o += "  \"r_stderr\": " + num(rep.r_stderr) + ",\n";
    o += "  \"floor_r\": " + num(rep.floor_r) + ",\n";
    o += "  \"fano_s\": " + num(rep.fano_s) + ",\n";
    o += "  \"fano_i\": " + num(rep.fano_i) + ",\n";
    o += "  \"gamma\": [";
    for (std::size_t j = 0; j < rep.gamma.size(); ++j) {
        if (j) o += ", ";
        o += num(rep.gamma[j]);
    }
    o += "],\n";
    o += std::string("  \"classification\": \"") + to_string(rep.classification) + "\"";
    if (cond && cond->result) {
        const ConditionalResult& c = *cond->result;
        const bool have_floor = std::isfinite(cond->fano_floor);
        const bool below = have_floor
            && c.fano_conditional < cond->fano_floor - cond->z * c.fano_stderr;
        o += ",\n  \"conditional\": {\n";
        o += "    \"window_lo\": " + num(cond->window.lo) + ",\n";
        o += "    \"window_hi\": " + num(cond->window.hi) + ",\n";
        o += "    \"retained\": " + std::to_string(c.retained) + ",\n";
        o += "    \"success_probability\": " + num(c.success_probability) + ",\n";
        o += "    \"mean\": " + num(c.mean_conditional) + ",\n";
        o += "    \"variance\": " + num(c.var_conditional) + ",\n";
        o += "    \"fano_conditional\": " + num(c.fano_conditional) + ",\n";
        o += "    \"fano_marginal\": " + num(c.fano_marginal) + ",\n";
        o += "    \"fano_stderr\": " + num(c.fano_stderr) + ",\n";
        o += "    \"fano_floor\": " + num(cond->fano_floor) + ",\n";
        o += std::string("    \"below_floor\": ") + (below ? "true" : "false") + ",\n";
        o += "    \"note\": \"" + detail::json_escape(
            "binomial detection bounds the dark-corrected conditional Fano factor from below "
            "by 1 - eta; an estimate under that bound indicates noise over-subtraction or a "
            "detection model mismatch, not deeper conditioning") + "\"\n";
        o += "  }";
    } else {
        o += ",\n  \"conditional\": null";
    }
    o += "\n}\n";
    return o;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open for writing: " + path);
    if (std::fwrite(content.data(), 1, content.size(), f) != content.size()) {
        std::fclose(f);
        throw DataError("write failed: " + path);
    }
    if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

// Plot-ready lag profile: one row per lag.
inline std::string render_gamma_csv(const std::vector<double>& gamma) {
    std::string o = "j,gamma\n";
    for (std::size_t j = 0; j < gamma.size(); ++j)
        o += std::to_string(j) + "," + format_double(gamma[j]) + "\n";
    return o;
}

// Plot-ready histogram: left bin edge, raw count, normalized probability.
inline std::string render_histogram_csv(const Histogram& h) {
    std::string o = "bin_left,count,probability\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        o += format_double(h.bin_left(b)) + ",";
        o += std::to_string(h.counts[b]) + ",";
        o += format_double(h.probability(b)) + "\n";
    }
    return o;
}

struct SweepRow {
    double intensity = 0.0;
    double rho = 0.0;
    std::int64_t whole_modes = 0;
    double t_s = 0.0, t_i = 0.0;
    double bg_s = 0.0, bg_i = 0.0;
    double mean_s = 0.0, mean_i = 0.0;
    double snl = 0.0;
    double sigma2_d = 0.0;
    double r_linear = 0.0;
    double r_db = 0.0;      // NaN when r_linear <= 0
    double floor_db = 0.0;  // 10 log10(1-eta) reference line; SNL line is 0 dB
};

inline std::string render_sweep_csv(const std::vector<SweepRow>& rows) {
    std::string o = "intensity,rho,whole_modes,t_s,t_i,bg_s,bg_i,mean_s,mean_i,snl,"
                    "sigma2_d,r_linear,r_db,snl_db,floor_db\n";
    for (const auto& r : rows) {
        o += format_double(r.intensity) + "," + format_double(r.rho) + ","
           + std::to_string(r.whole_modes) + ","
           + format_double(r.t_s) + "," + format_double(r.t_i) + ","
           + format_double(r.bg_s) + "," + format_double(r.bg_i) + ","
           + format_double(r.mean_s) + "," + format_double(r.mean_i) + ","
           + format_double(r.snl) + "," + format_double(r.sigma2_d) + ","
           + format_double(r.r_linear) + "," + format_double(r.r_db) + ",0,"
           + format_double(r.floor_db) + "\n";
    }
    return o;
}

} // namespace twinbeam
