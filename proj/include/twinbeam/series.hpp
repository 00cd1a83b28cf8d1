#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "twinbeam/detection.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/stats.hpp"

namespace twinbeam {

// Moments of a no-light companion run, used by the dark corrections.
// cov defaults to 0: arm-wise noise is subtracted per arm and the
// cross-covariance of the electronics is an explicit input, not assumed.
struct DarkStats {
    double mean_s = 0.0;
    double mean_i = 0.0;
    double var_s = 0.0;
    double var_i = 0.0;
    double cov = 0.0;
    std::uint64_t count = 0;
};

struct ShotSeries {
    std::vector<DetectedShot> shots;
    std::optional<DarkStats> dark;
    std::string meta = "simulated";

    std::size_t size() const { return shots.size(); }
};

inline std::vector<double> column_s(const std::vector<DetectedShot>& shots) {
    std::vector<double> out(shots.size());
    for (std::size_t k = 0; k < shots.size(); ++k) out[k] = shots[k].m_s;
    return out;
}

inline std::vector<double> column_i(const std::vector<DetectedShot>& shots) {
    std::vector<double> out(shots.size());
    for (std::size_t k = 0; k < shots.size(); ++k) out[k] = shots[k].m_i;
    return out;
}

inline DarkStats compute_dark_stats(const std::vector<DetectedShot>& dark_shots) {
    if (dark_shots.size() < 2)
        throw DataError("dark statistics need at least 2 samples");
    const auto s = column_s(dark_shots);
    const auto i = column_i(dark_shots);
    DarkStats d;
    d.mean_s = mean(s);
    d.mean_i = mean(i);
    d.var_s = variance(s);
    d.var_i = variance(i);
    d.cov = covariance(s, i);
    d.count = dark_shots.size();
    return d;
}

// Shot files: CSV, header "shot,m_s,m_i", decimal electron values at full
// double precision, UTF-8, LF line endings. The shot column is the 0-based
// pulse index (the same index that seeds the per-shot RNG substream).
inline void write_shot_csv(const std::string& path, const std::vector<DetectedShot>& shots) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open for writing: " + path);
    std::fputs("shot,m_s,m_i\n", f);
    for (std::size_t k = 0; k < shots.size(); ++k)
        std::fprintf(f, "%zu,%.17g,%.17g\n", k, shots[k].m_s, shots[k].m_i);
    if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

namespace detail {

inline double parse_field(const std::string& field, const std::string& path, std::size_t line_no) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || errno == ERANGE)
        throw DataError(path + ": line " + std::to_string(line_no) + ": bad numeric field '" + field + "'");
    return v;
}

} // namespace detail

inline std::vector<DetectedShot> read_shot_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open: " + path);
    std::vector<DetectedShot> shots;
    std::string line;
    std::size_t line_no = 0;
    char buf[4096];
    bool saw_header = false;
    while (std::fgets(buf, sizeof buf, f)) {
        ++line_no;
        line.assign(buf);
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
        if (!saw_header) {
            if (line != "shot,m_s,m_i") {
                std::fclose(f);
                throw DataError(path + ": line 1: expected header 'shot,m_s,m_i'");
            }
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            std::fclose(f);
            throw DataError(path + ": line " + std::to_string(line_no) + ": expected 3 comma-separated fields");
        }
        try {
            detail::parse_field(line.substr(0, c1), path, line_no);
            DetectedShot s;
            s.m_s = detail::parse_field(line.substr(c1 + 1, c2 - c1 - 1), path, line_no);
            s.m_i = detail::parse_field(line.substr(c2 + 1), path, line_no);
            shots.push_back(s);
        } catch (...) {
            std::fclose(f);
            throw;
        }
    }
    std::fclose(f);
    if (!saw_header) throw DataError(path + ": empty file, expected header 'shot,m_s,m_i'");
    return shots;
}

} // namespace twinbeam
