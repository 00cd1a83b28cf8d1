#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "twinbeam/analysis.hpp"
#include "twinbeam/oracle.hpp"
#include "twinbeam/pipeline.hpp"

#include "test_util.hpp"

namespace tb = twinbeam;

namespace {

tb::ExperimentConfig ideal_twin_config(std::uint64_t count, std::uint64_t dark_count = 0) {
    tb::ExperimentConfig cfg;
    cfg.source.mu = 20;
    cfg.source.nbar = 50.9;
    cfg.arm_s.eta = 0.55;
    cfg.arm_i.eta = 0.55;
    cfg.run.count = count;
    cfg.run.dark_count = dark_count;
    return cfg;
}

tb::ShotSeries series_of(const std::vector<tb::DetectedShot>& shots) {
    tb::ShotSeries s;
    s.shots = shots;
    return s;
}

} // namespace

TEST_CASE("identical records have unit correlation at zero lag", "[analysis]") {
    std::vector<tb::DetectedShot> shots;
    for (int k = 0; k < 64; ++k) shots.push_back({static_cast<double>(k % 7), static_cast<double>(k % 7)});
    const auto gamma = tb::gamma_profile(series_of(shots), 0, false);
    REQUIRE(gamma[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("pulses are uncorrelated across lags", "[analysis]") {
    const auto sim = tb::simulate_series(ideal_twin_config(10000), 404);
    const auto series = tb::to_series(sim);
    const auto gamma = tb::gamma_profile(series, 3, false);
    REQUIRE(gamma[0] > 0.9); // same-pulse twins
    for (std::size_t j = 1; j < gamma.size(); ++j)
        REQUIRE(std::abs(gamma[j]) < 4.0 / std::sqrt(10000.0));
}

TEST_CASE("dark-corrected correlation recovers the oracle", "[analysis]") {
    auto cfg = ideal_twin_config(200000, 200000);
    cfg.arm_s.dark_sigma = 30.0;
    cfg.arm_i.dark_sigma = 40.0;
    const auto series = tb::to_series(tb::simulate_series(cfg, 2718));

    const auto gamma = tb::gamma_profile(series, 0, true);
    const double expected = tb::gamma0_expected(cfg.source, cfg.arm_s, cfg.arm_i, true);
    REQUIRE(expected == Catch::Approx(0.98447).margin(5e-5));
    REQUIRE(std::abs(gamma[0] - expected) < 0.01);

    // Uncorrected, the electronic noise dilutes the correlation.
    const auto raw = tb::gamma_profile(series, 0, false);
    REQUIRE(raw[0] < gamma[0]);
    REQUIRE(std::abs(raw[0] - tb::gamma0_expected(cfg.source, cfg.arm_s, cfg.arm_i, false)) < 0.01);
}

TEST_CASE("correction without a dark run is refused", "[analysis]") {
    const auto sim = tb::simulate_series(ideal_twin_config(100), 1);
    const auto series = tb::to_series(sim);
    REQUIRE(!series.dark.has_value());

    tb::AnalysisOptions opts;
    opts.corrected = true;
    REQUIRE_THROWS_AS(tb::gamma_profile(series, 0, true), tb::DataError);
    REQUIRE_THROWS_AS(tb::noise_reduction(series, opts), tb::DataError);
    REQUIRE_THROWS_AS(tb::conditional_distribution(series, tb::Window{}, opts), tb::DataError);
    REQUIRE_THROWS_AS(tb::marginal_fano(series, tb::Arm::Signal, true), tb::DataError);
}

TEST_CASE("over-subtraction is an error, not a clamp", "[analysis]") {
    auto series = tb::to_series(tb::simulate_series(ideal_twin_config(5000), 9));

    // A fabricated dark run larger than the measured variance.
    tb::DarkStats fake;
    fake.var_s = tb::variance(tb::column_s(series.shots)) + 10.0;
    fake.var_i = 10.0;
    fake.count = 1000;
    series.dark = fake;
    REQUIRE_THROWS_AS(tb::gamma_profile(series, 0, true), tb::NumericalError);

    // Moderate inflation keeps the variances positive but drives the
    // corrected correlation beyond 1 (equivalently sigma2_d below 0).
    tb::DarkStats inflated;
    inflated.var_s = 1000.0;
    inflated.var_i = 1000.0;
    inflated.count = 1000;
    series.dark = inflated;
    tb::AnalysisOptions opts;
    opts.corrected = true;
    REQUIRE_THROWS_AS(tb::noise_reduction(series, opts), tb::NumericalError);
}

TEST_CASE("perfect twins have a silent difference channel", "[analysis]") {
    auto cfg = ideal_twin_config(500);
    cfg.arm_s.eta = 1.0;
    cfg.arm_i.eta = 1.0;
    const auto series = tb::to_series(tb::simulate_series(cfg, 77));

    const auto rep = tb::noise_reduction(series);
    REQUIRE(rep.sigma2_d == 0.0);
    REQUIRE(rep.r_linear == 0.0);
    REQUIRE(!rep.r_db.has_value()); // log of zero has no finite value
    REQUIRE(rep.gamma[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rep.classification == tb::Classification::Nonclassical);
}

TEST_CASE("difference histogram bins around integer differences", "[analysis]") {
    std::vector<tb::DetectedShot> shots = {{0.0, 1.0}, {2.0, 2.0}, {5.0, 5.0}, {7.0, 5.0}};
    const tb::Histogram h = tb::difference_histogram(series_of(shots), 1.0);

    // d = {-1, 0, 0, 2}: four bins from -1 to 2, centered on integers.
    REQUIRE(h.total == 4);
    REQUIRE(h.first_bin == -1);
    REQUIRE(h.counts.size() == 4);
    REQUIRE(h.counts[0] == 1);
    REQUIRE(h.counts[1] == 2);
    REQUIRE(h.counts[2] == 0);
    REQUIRE(h.counts[3] == 1);
    REQUIRE(h.bin_left(0) == Catch::Approx(-1.5).margin(1e-12));
    REQUIRE(h.probability(1) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("independent Poisson beams sit at the shot-noise level", "[analysis]") {
    tb::ExperimentConfig cfg;
    cfg.source.mu = 1;
    cfg.source.nbar = 1000.0;
    cfg.source.kind = tb::SourceKind::CoherentPair;
    cfg.arm_s.eta = 0.55;
    cfg.arm_i.eta = 0.55;
    cfg.run.count = 100000;
    const auto series = tb::to_series(tb::simulate_series(cfg, 31415));

    const auto rep = tb::noise_reduction(series);
    REQUIRE(std::abs(rep.r_linear - 1.0) < 0.02);
    REQUIRE(std::abs(rep.fano_s - 1.0) < 0.03);
    REQUIRE(std::abs(rep.fano_i - 1.0) < 0.03);
    REQUIRE(std::abs(rep.sigma2_d_raw - 2.0 * 0.55 * 1000.0) < 0.03 * 1100.0);
}

TEST_CASE("twin beams estimate R = 1 - eta with a truthful stderr", "[analysis]") {
    const auto series = tb::to_series(tb::simulate_series(ideal_twin_config(100000), 1618));

    tb::AnalysisOptions opts;
    opts.floor_r = 0.45;
    const auto rep = tb::noise_reduction(series, opts);
    REQUIRE(std::abs(rep.r_linear - 0.45) < 0.012);
    REQUIRE(rep.r_db.has_value());
    REQUIRE(*rep.r_db == Catch::Approx(10.0 * std::log10(rep.r_linear)).margin(1e-12));
    // Analytic se of R-hat here is about 0.0021.
    REQUIRE(rep.r_stderr > 0.001);
    REQUIRE(rep.r_stderr < 0.004);
    REQUIRE(rep.classification == tb::Classification::Nonclassical);
    REQUIRE(rep.floor_r == 0.45);
}

TEST_CASE("full-range conditioning reproduces the marginal", "[analysis]") {
    const auto series = tb::to_series(tb::simulate_series(ideal_twin_config(20000), 55));

    const auto res = tb::conditional_distribution(series, tb::Window{});
    REQUIRE(res.retained == series.size());
    REQUIRE(res.success_probability == 1.0);

    const auto all_i = tb::column_i(series.shots);
    REQUIRE(res.mean_conditional == Catch::Approx(tb::mean(all_i)).epsilon(1e-12));
    REQUIRE(res.var_conditional == Catch::Approx(tb::variance(all_i)).epsilon(1e-12));
    REQUIRE(res.fano_conditional == Catch::Approx(res.fano_marginal).epsilon(1e-12));
    REQUIRE(res.fano_marginal ==
            Catch::Approx(tb::marginal_fano(series, tb::Arm::Idler, false)).epsilon(1e-12));
}

TEST_CASE("windows are closed intervals and validated", "[analysis]") {
    tb::Window w;
    w.lo = 1.0;
    w.hi = 3.0;
    REQUIRE(w.contains(1.0));
    REQUIRE(w.contains(3.0));
    REQUIRE(!w.contains(0.999));
    REQUIRE(!w.contains(3.001));

    tb::Window bad;
    bad.lo = 5.0;
    bad.hi = 1.0;
    REQUIRE_THROWS_AS(bad.validate(), tb::ParameterError);
    tb::Window nan_window;
    nan_window.lo = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(nan_window.validate(), tb::ParameterError);

    const auto series = tb::to_series(tb::simulate_series(ideal_twin_config(100), 3));
    tb::Window far;
    far.lo = 1e9;
    REQUIRE_THROWS_AS(tb::conditional_distribution(series, far, {}), tb::DataError);
}

TEST_CASE("post-selection matches the exact conditional law", "[analysis]") {
    tb::ExperimentConfig cfg;
    cfg.source.mu = 1;
    cfg.source.nbar = 2.0;
    cfg.arm_s.eta = 0.5;
    cfg.arm_i.eta = 0.5;
    cfg.run.count = 200000;
    const auto series = tb::to_series(tb::simulate_series(cfg, 2025));

    const auto table = tb::joint_pmf_bruteforce(cfg.source, {}, cfg.arm_s, cfg.arm_i, 60);
    const auto [cond, mass] = table.conditional_i(1, 1);
    const double exact_mean = tb::pmf_mean(cond);
    const double exact_fano = tb::pmf_variance(cond) / exact_mean;

    tb::Window w;
    w.lo = 1.0;
    w.hi = 1.0;
    const auto res = tb::conditional_distribution(series, w, {});

    const double k = static_cast<double>(res.retained);
    REQUIRE(std::abs(res.success_probability - mass) <
            4.0 * std::sqrt(mass * (1.0 - mass) / static_cast<double>(series.size())));
    REQUIRE(std::abs(res.mean_conditional - exact_mean) <
            4.0 * std::sqrt(res.var_conditional / k));
    REQUIRE(std::abs(res.fano_conditional - exact_fano) < 4.0 * res.fano_stderr + 1e-9);
    // Histogram of retained idler counts carries exactly the kept mass.
    REQUIRE(res.histogram.total == res.retained);
}

TEST_CASE("marginal Fano factors track the oracle through collection and noise", "[analysis]") {
    tb::ExperimentConfig cfg;
    cfg.source.mu = 20;
    cfg.source.nbar = 50.9;
    cfg.arm_s.eta = 0.55;
    cfg.arm_i.eta = 0.55;
    cfg.arm_s.dark_sigma = 159.0;
    cfg.arm_i.dark_sigma = 214.0;
    cfg.collection.t_s = 0.943026;
    cfg.collection.bg_i = 60.1818;
    cfg.run.count = 200000;
    cfg.run.dark_count = 200000;
    const auto series = tb::to_series(tb::simulate_series(cfg, 6626));

    const auto ms = tb::twin_moments(cfg.source, cfg.collection, cfg.arm_s, cfg.arm_i);
    REQUIRE(ms.fano_s == Catch::Approx(27.40).margin(0.01));

    const double fano_s = tb::marginal_fano(series, tb::Arm::Signal, true);
    const double fano_i = tb::marginal_fano(series, tb::Arm::Idler, true);
    REQUIRE(std::abs(fano_s - ms.fano_s) < 1.2);
    REQUIRE(std::abs(fano_i - ms.fano_i) < 1.2);
}

TEST_CASE("classification thresholds", "[analysis]") {
    using C = tb::Classification;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    REQUIRE(tb::classify(1.2, 0.45, 0.01, 3.0) == C::Classical);
    REQUIRE(tb::classify(1.0, 0.45, 0.01, 3.0) == C::Classical);
    REQUIRE(tb::classify(0.8, 0.45, 0.01, 3.0) == C::Nonclassical);
    REQUIRE(tb::classify(0.45, 0.45, 0.01, 3.0) == C::Nonclassical);
    REQUIRE(tb::classify(0.43, 0.45, 0.01, 3.0) == C::Nonclassical); // within tolerance
    REQUIRE(tb::classify(0.40, 0.45, 0.01, 3.0) == C::OverSubtracted);
    REQUIRE(tb::classify(0.2, nan, 0.01, 3.0) == C::Nonclassical); // no floor known
}

TEST_CASE("estimators validate their inputs", "[analysis]") {
    tb::ShotSeries empty;
    REQUIRE_THROWS_AS(tb::noise_reduction(empty, {}), tb::DataError);
    REQUIRE_THROWS_AS(tb::difference_histogram(empty), tb::DataError);
    REQUIRE_THROWS_AS(tb::conditional_distribution(empty, tb::Window{}, {}), tb::DataError);

    std::vector<tb::DetectedShot> two = {{1.0, 2.0}, {3.0, 4.0}};
    const auto series = series_of(two);
    REQUIRE_THROWS_AS(tb::gamma_profile(series, -1, false), tb::ParameterError);
    REQUIRE_THROWS_AS(tb::gamma_profile(series, 2, false), tb::ParameterError);

    // All-zero records have no shot-noise level to normalize by.
    std::vector<tb::DetectedShot> zeros = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    REQUIRE_THROWS_AS(tb::noise_reduction(series_of(zeros), {}), tb::NumericalError);
}
