// Batch front-end: config-driven simulation, analysis of shot files, pump
// sweeps, conditional preparation, and mode-number fits.
//
// Exit codes: 0 success, 2 configuration/parameter error, 3 data error,
// 4 numerical error (undefined result such as R <= 0 in dB).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "twinbeam/twinbeam.hpp"

namespace tb = twinbeam;

namespace {

// --config wins; the environment variable only supplies the default path.
tb::ExperimentConfig load_cfg(const std::string& flag_path, bool required) {
    std::string path = flag_path;
    if (path.empty()) {
        if (const char* env = std::getenv("TWINBEAM_CONFIG")) path = env;
    }
    if (path.empty()) {
        if (required)
            throw tb::ParameterError("no configuration: pass --config FILE or set TWINBEAM_CONFIG");
        return {};
    }
    return tb::load_config(path);
}

double parse_bound(const std::string& tok, double fallback) {
    if (tok.empty()) return fallback;
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw tb::ParameterError("window: bad bound '" + tok + "'");
    return v;
}

tb::Window parse_window_flag(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw tb::ParameterError("window: expected LO:HI (use inf/-inf for open ends)");
    tb::Window w;
    w.lo = parse_bound(text.substr(0, colon), w.lo);
    w.hi = parse_bound(text.substr(colon + 1), w.hi);
    w.validate();
    return w;
}

std::string derive_dark_path(const std::string& shots_path) {
    const std::size_t dot = shots_path.rfind('.');
    if (dot == std::string::npos || shots_path.find('/', dot) != std::string::npos)
        return shots_path + "_dark";
    return shots_path.substr(0, dot) + "_dark" + shots_path.substr(dot);
}

struct SimulateArgs {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = "shots.csv";
    std::string dark_out;
    std::int64_t count_override = -1;
    std::int64_t dark_count_override = -1;
};

int run_simulate(const SimulateArgs& a) {
    tb::ExperimentConfig cfg = load_cfg(a.config, true);
    if (a.count_override >= 0) cfg.run.count = static_cast<std::uint64_t>(a.count_override);
    if (a.dark_count_override >= 0) cfg.run.dark_count = static_cast<std::uint64_t>(a.dark_count_override);
    if (cfg.run.count == 0)
        throw tb::ParameterError("simulate: shot count is 0 (set run.count in the config or pass --count)");

    const tb::SimulationResult sim = tb::simulate_series(cfg, a.seed);
    tb::write_shot_csv(a.out, sim.shots);
    const auto s = tb::column_s(sim.shots);
    const auto i = tb::column_i(sim.shots);
    std::printf("shots: %zu -> %s\n", sim.shots.size(), a.out.c_str());
    std::printf("mean_s: %.6g\nmean_i: %.6g\n", tb::mean(s), tb::mean(i));
    if (!sim.dark.empty()) {
        const std::string dark_path = a.dark_out.empty() ? derive_dark_path(a.out) : a.dark_out;
        tb::write_shot_csv(dark_path, sim.dark);
        std::printf("dark shots: %zu -> %s\n", sim.dark.size(), dark_path.c_str());
    }
    return 0;
}

struct AnalyzeArgs {
    std::string config;
    std::string shots;
    std::string dark;
    std::string out;       // empty: report to stdout
    std::string gamma_out; // lag profile CSV
    std::string pd_out;    // difference histogram CSV
    std::string window;    // conditional window, only for the conditional command
    std::string hist_out;  // conditional histogram CSV
    bool uncorrected = false;
    bool corrected = false;
    std::int64_t j_max = -1;
    double bin_width = 0.0;
};

tb::ShotSeries load_series(const AnalyzeArgs& a) {
    tb::ShotSeries series;
    series.shots = tb::read_shot_csv(a.shots);
    if (!a.dark.empty()) {
        const auto dark_shots = tb::read_shot_csv(a.dark);
        series.dark = tb::compute_dark_stats(dark_shots);
        if (dark_shots.size() != series.shots.size())
            std::fprintf(stderr, "note: dark run has %zu shots vs %zu signal shots; "
                                 "dark data enter only through their moments\n",
                         dark_shots.size(), series.shots.size());
    }
    return series;
}

bool have_config(const AnalyzeArgs& a) {
    return !a.config.empty() || std::getenv("TWINBEAM_CONFIG") != nullptr;
}

tb::AnalysisOptions effective_options(const AnalyzeArgs& a, const tb::ExperimentConfig& cfg,
                                      bool dark_present) {
    tb::AnalysisOptions opts = cfg.analysis;
    opts.corrected = dark_present && !a.uncorrected;
    if (a.corrected && !dark_present)
        throw tb::ParameterError("--corrected needs a dark file (--dark)");
    if (a.j_max >= 0) opts.j_max = a.j_max;
    if (a.bin_width > 0.0) opts.bin_width = a.bin_width;
    // A bare shot file carries no efficiency, so the floor stays unknown.
    opts.floor_r = have_config(a) ? cfg.floor_r()
                                  : std::numeric_limits<double>::quiet_NaN();
    return opts;
}

void emit_report(const std::string& out, const std::string& rendered) {
    if (out.empty())
        std::fputs(rendered.c_str(), stdout);
    else
        tb::write_text_file(out, rendered);
}

int run_analyze(const AnalyzeArgs& a) {
    const tb::ExperimentConfig cfg = load_cfg(a.config, false);
    const tb::ShotSeries series = load_series(a);
    const tb::AnalysisOptions opts = effective_options(a, cfg, series.dark.has_value());

    const tb::AnalysisReport rep = tb::noise_reduction(series, opts);
    emit_report(a.out, tb::render_report(rep));
    if (!a.gamma_out.empty())
        tb::write_text_file(a.gamma_out, tb::render_gamma_csv(rep.gamma));
    if (!a.pd_out.empty())
        tb::write_text_file(a.pd_out, tb::render_histogram_csv(
            tb::difference_histogram(series, opts.bin_width)));
    return rep.r_db ? 0 : 4; // R <= 0: dB undefined, reported as error state
}

int run_conditional(const AnalyzeArgs& a) {
    const tb::ExperimentConfig cfg = load_cfg(a.config, false);
    const tb::ShotSeries series = load_series(a);
    const tb::AnalysisOptions opts = effective_options(a, cfg, series.dark.has_value());

    tb::Window window;
    if (!a.window.empty())
        window = parse_window_flag(a.window);
    else if (cfg.window)
        window = *cfg.window;
    else
        throw tb::ParameterError("conditional: no window (pass --window LO:HI or set analysis.window)");

    const tb::AnalysisReport rep = tb::noise_reduction(series, opts);
    const tb::ConditionalResult cond = tb::conditional_distribution(series, window, opts);

    tb::ConditionalReportContext ctx;
    ctx.result = &cond;
    ctx.window = window;
    if (have_config(a))
        ctx.fano_floor = 1.0 - cfg.arm_i.eta; // thinning floor of the conditioned arm
    emit_report(a.out, tb::render_report(rep, &ctx));
    if (!a.hist_out.empty())
        tb::write_text_file(a.hist_out, tb::render_histogram_csv(cond.histogram));
    return 0;
}

struct SweepArgs {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = "sweep.csv";
};

int run_sweep(const SweepArgs& a) {
    tb::ExperimentConfig cfg = load_cfg(a.config, true);
    if (!cfg.sweep)
        throw tb::ParameterError("sweep: config has no sweep section");
    const tb::SweepConfig& sw = *cfg.sweep;
    const auto points = tb::sweep_pump(sw.intensities, sw.map, cfg.source, cfg.arm_s, cfg.arm_i);

    const double floor = cfg.floor_r();
    std::vector<tb::SweepRow> rows;
    rows.reserve(points.size());
    for (std::size_t idx = 0; idx < points.size(); ++idx) {
        const auto& pt = points[idx];
        tb::ExperimentConfig pc = cfg;
        pc.source = pt.source;
        pc.collection = pt.collection;
        pc.run.count = sw.count;
        pc.run.dark_count = sw.dark_count;

        const std::uint64_t point_seed = tb::derive_stream_seed(a.seed, idx);
        const tb::SimulationResult sim = tb::simulate_series(pc, point_seed);
        tb::ShotSeries series = tb::to_series(sim);

        tb::AnalysisOptions opts;
        opts.corrected = series.dark.has_value();
        opts.floor_r = floor;
        const tb::AnalysisReport rep = tb::noise_reduction(series, opts);

        tb::SweepRow row;
        row.intensity = pt.pump_intensity;
        row.rho = sw.map.rho_ref / std::pow(pt.pump_intensity, sw.map.area_exponent);
        row.whole_modes = pt.collection.whole_modes;
        row.t_s = pt.collection.t_s;
        row.t_i = pt.collection.t_i;
        row.bg_s = pt.collection.bg_s;
        row.bg_i = pt.collection.bg_i;
        row.mean_s = rep.mean_s;
        row.mean_i = rep.mean_i;
        row.snl = rep.snl;
        row.sigma2_d = rep.sigma2_d;
        row.r_linear = rep.r_linear;
        row.r_db = rep.r_db ? *rep.r_db : std::numeric_limits<double>::quiet_NaN();
        row.floor_db = floor > 0.0 ? 10.0 * std::log10(floor)
                                   : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
    }
    tb::write_text_file(a.out, tb::render_sweep_csv(rows));

    std::size_t min_idx = 0;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].r_linear < rows[min_idx].r_linear) min_idx = k;
    std::printf("sweep points: %zu -> %s\n", rows.size(), a.out.c_str());
    std::printf("minimum R: %.6g (%.4g dB) at intensity %.6g\n",
                rows[min_idx].r_linear, rows[min_idx].r_db, rows[min_idx].intensity);
    return 0;
}

struct FitArgs {
    std::string shots;
    std::string dark;
    double gamma0 = -1.0;
    double mean_m = -1.0;
    double eta = -1.0;
};

int run_fit(const FitArgs& a) {
    if (a.eta < 0.0)
        throw tb::ParameterError("fit: --eta is required");
    double gamma0 = a.gamma0;
    double mean_m = a.mean_m;
    if (!a.shots.empty()) {
        tb::ShotSeries series;
        series.shots = tb::read_shot_csv(a.shots);
        if (a.dark.empty())
            throw tb::ParameterError("fit: fitting from a shot file needs --dark for the corrected correlation");
        series.dark = tb::compute_dark_stats(tb::read_shot_csv(a.dark));
        gamma0 = tb::gamma_profile(series, 0, true)[0];
        const auto s = tb::column_s(series.shots);
        const auto i = tb::column_i(series.shots);
        mean_m = 0.5 * (tb::mean(s) + tb::mean(i));
        std::fprintf(stderr, "estimated gamma0 = %.6g, mean_m = %.6g\n", gamma0, mean_m);
    }
    if (gamma0 < 0.0 || mean_m < 0.0)
        throw tb::ParameterError("fit: pass --shots/--dark or both --gamma0 and --mean-m");
    const double mu = tb::fit_mode_number(gamma0, mean_m, a.eta);
    std::printf("%.17g\n", mu);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"twin-beam photodetection simulator and estimator toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "generate a shot file (and optional dark file)");
    sim->add_option("--config,-c", sim_args.config, "JSON configuration (default: $TWINBEAM_CONFIG)");
    sim->add_option("--seed,-s", sim_args.seed, "master RNG seed")->required();
    sim->add_option("--out,-o", sim_args.out, "output CSV path");
    sim->add_option("--dark-out", sim_args.dark_out, "dark-run CSV path");
    sim->add_option("--count", sim_args.count_override, "override run.count")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--dark-count", sim_args.dark_count_override, "override run.dark_count")
        ->check(CLI::NonNegativeNumber);

    AnalyzeArgs an_args;
    auto* an = app.add_subcommand("analyze", "estimate correlation, noise reduction, Fano factors");
    an->add_option("--shots", an_args.shots, "shot CSV")->required();
    an->add_option("--dark", an_args.dark, "dark-run CSV");
    an->add_option("--config,-c", an_args.config, "JSON configuration (analysis options, floor)");
    an->add_option("--out,-o", an_args.out, "report JSON path (default: stdout)");
    an->add_option("--gamma-out", an_args.gamma_out, "lag-profile CSV path");
    an->add_option("--pd-out", an_args.pd_out, "difference-histogram CSV path");
    an->add_option("--j-max", an_args.j_max, "highest correlation lag");
    an->add_option("--bin-width", an_args.bin_width, "histogram bin width (electrons)");
    an->add_flag("--uncorrected", an_args.uncorrected, "skip the dark correction");
    an->add_flag("--corrected", an_args.corrected, "require the dark correction");

    AnalyzeArgs cond_args;
    auto* cond = app.add_subcommand("conditional", "post-select idler shots by a signal window");
    cond->add_option("--shots", cond_args.shots, "shot CSV")->required();
    cond->add_option("--dark", cond_args.dark, "dark-run CSV");
    cond->add_option("--config,-c", cond_args.config, "JSON configuration");
    cond->add_option("--window,-w", cond_args.window, "signal window LO:HI (inf/-inf allowed)");
    cond->add_option("--out,-o", cond_args.out, "report JSON path (default: stdout)");
    cond->add_option("--hist-out", cond_args.hist_out, "conditional histogram CSV path");
    cond->add_option("--bin-width", cond_args.bin_width, "histogram bin width (electrons)");
    cond->add_flag("--uncorrected", cond_args.uncorrected, "skip the dark correction");
    cond->add_flag("--corrected", cond_args.corrected, "require the dark correction");

    SweepArgs sweep_args;
    auto* sw = app.add_subcommand("sweep", "simulate a pump-intensity scan and tabulate R");
    sw->add_option("--config,-c", sweep_args.config, "JSON configuration with a sweep section");
    sw->add_option("--seed,-s", sweep_args.seed, "master RNG seed")->required();
    sw->add_option("--out,-o", sweep_args.out, "sweep table CSV path");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "invert the correlation for the mode count");
    fit->add_option("--gamma0", fit_args.gamma0, "corrected zero-lag correlation");
    fit->add_option("--mean-m", fit_args.mean_m, "mean detected counts (electrons)");
    fit->add_option("--eta", fit_args.eta, "detection efficiency")->required();
    fit->add_option("--shots", fit_args.shots, "estimate gamma0/mean from this shot CSV");
    fit->add_option("--dark", fit_args.dark, "dark-run CSV for the corrected estimate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        if (sim->parsed()) return run_simulate(sim_args);
        if (an->parsed()) return run_analyze(an_args);
        if (cond->parsed()) return run_conditional(cond_args);
        if (sw->parsed()) return run_sweep(sweep_args);
        if (fit->parsed()) return run_fit(fit_args);
    } catch (const tb::ParameterError& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return 2;
    } catch (const tb::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const tb::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
