#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "localnet/harness.hpp"
#include "localnet/io.hpp"

using namespace localnet;

namespace {
nlohmann::json small_sweep_config() {
    return nlohmann::json{
        {"manifold", {{"kind", "circle"}, {"radius", 0.9}}},
        {"target", {{"kind", "coordinate"}, {"axis", 0}}},
        {"noise", {{"kind", "uniform"}, {"half_width", 0.2}}},
        {"m_values", {27, 64, 125}},
        {"trials", 2},
        {"mode", "feedback"},
        {"seed", 321},
        {"test_points", 256},
        {"atlas", {{"assignment_samples", 20000}, {"cover_samples", 1024}}},
    };
}

}  // namespace

TEST_CASE("config parsing and validation") {
    const ExperimentConfig config = ExperimentConfig::from_json(small_sweep_config());
    CHECK(config.m_values == std::vector<std::size_t>{27, 64, 125});
    CHECK(config.mode == DeepNetEstimator::Mode::Feedback);
    CHECK(config.seed == 321);

    nlohmann::json bad = small_sweep_config();
    bad["m_values"] = {64, 64};
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
    bad = small_sweep_config();
    bad["trials"] = 0;
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
    bad = small_sweep_config();
    bad["mode"] = "sideways";
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
}

TEST_CASE("environment overrides") {
    setenv("LOCALNET_SEED", "999", 1);
    setenv("LOCALNET_MODE", "interior", 1);
    const nlohmann::json merged = apply_env_overrides(small_sweep_config());
    unsetenv("LOCALNET_SEED");
    unsetenv("LOCALNET_MODE");
    const ExperimentConfig config = ExperimentConfig::from_json(merged);
    CHECK(config.seed == 999);
    CHECK(config.mode == DeepNetEstimator::Mode::Interior);
}

TEST_CASE("rate sweep: n policy, determinism, trial-prefix stability") {
    const ExperimentConfig config = ExperimentConfig::from_json(small_sweep_config());
    const RateResult result = run_rate_sweep(config);
    REQUIRE(result.per_m.size() == 3);
    CHECK(result.per_m[0].n_used == 3);   // 27^(1/3)
    CHECK(result.per_m[1].n_used == 4);   // 64^(1/3)
    CHECK(result.per_m[2].n_used == 5);   // 125^(1/3)
    CHECK(result.theory_slope == doctest::Approx(-2.0 / 3.0));
    for (const auto& p : result.per_m) CHECK(p.per_trial.size() == 2);

    const RateResult again = run_rate_sweep(config);
    CHECK(result.to_json() == again.to_json());

    nlohmann::json more_json = small_sweep_config();
    more_json["trials"] = 4;
    const RateResult more = run_rate_sweep(ExperimentConfig::from_json(more_json));
    for (std::size_t i = 0; i < result.per_m.size(); ++i) {
        REQUIRE(more.per_m[i].per_trial.size() == 4);
        CHECK(more.per_m[i].per_trial[0] == result.per_m[i].per_trial[0]);
        CHECK(more.per_m[i].per_trial[1] == result.per_m[i].per_trial[1]);
    }
}

TEST_CASE("constant target with no noise: zero error, undefined slope") {
    // the zero-denominator rule predicts 0 on unpopulated cells, so the
    // exactly-zero sweep needs the constant to be 0
    nlohmann::json j = small_sweep_config();
    j["target"] = {{"kind", "constant"}, {"value", 0.0}};
    j["noise"] = {{"kind", "none"}};
    const RateResult result = run_rate_sweep(ExperimentConfig::from_json(j));
    for (const auto& p : result.per_m) CHECK(p.mse_mean == 0.0);
    CHECK_FALSE(result.slope_defined);
    CHECK(result.to_json().at("slope").is_null());

    // a nonzero constant is reproduced exactly on every populated cell
    nlohmann::json j2 = small_sweep_config();
    j2["target"] = {{"kind", "constant"}, {"value", 0.25}};
    j2["noise"] = {{"kind", "none"}};
    j2["m_values"] = {512};
    const ExperimentConfig config = ExperimentConfig::from_json(j2);
    const SampleSet set = draw_sample_set(*config.manifold, config.target, config.noise, 512, 5);
    auto atlas = std::make_shared<Atlas>(build_atlas(config.manifold, config.atlas_options, 5));
    const DeepNetEstimator est(atlas, set, choose_n(512, 1.0, 1));
    Rng rng(6);
    for (int iter = 0; iter < 500; ++iter) {
        const AmbientPoint x = config.manifold->embed(config.manifold->sample_param(rng));
        const double pred = est.predict_feedback(x);
        if (pred != 0.0) CHECK(pred == 0.25);  // populated cells give the constant back exactly
    }
}

TEST_CASE("emit results: json and csv round trips") {
    const ExperimentConfig config = ExperimentConfig::from_json(small_sweep_config());
    const RateResult result = run_rate_sweep(config);

    const std::string json_path = "harness_emit_test.json";
    const std::string csv_path = "harness_emit_test.csv";
    emit_results(result, json_path, "json");
    emit_results(result, csv_path, "csv");
    CHECK_THROWS_AS(emit_results(result, csv_path, "yaml"), std::invalid_argument);

    const nlohmann::json loaded = read_json_file(json_path);
    CHECK(loaded == result.to_json());
    CHECK(loaded.at("per_m").size() == 3);
    for (const auto& p : loaded.at("per_m")) {
        CHECK(p.contains("log2_m"));
        CHECK(p.contains("log_mse"));
    }

    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "m,n_used,mse_mean,mse_std,log2_m,log_mse");
    std::size_t rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);

    std::remove(json_path.c_str());
    std::remove(csv_path.c_str());
}

TEST_CASE("feedback comparison on an atom-free distribution") {
    nlohmann::json j = small_sweep_config();
    j["distribution"] = {{"kind", "boundary-atom"}, {"p_atom", 0.0}};
    j["m_values"] = {64};
    const FeedbackComparisonResult result = run_feedback_comparison(ExperimentConfig::from_json(j));
    CHECK(result.mean_lambda_ratio == 1.0);  // no atoms, no truncated pairs
    REQUIRE(result.mse_ratio.size() == 1);
    CHECK(std::isfinite(result.mse_ratio[0]));

    nlohmann::json uniform = small_sweep_config();
    CHECK_THROWS_AS(run_feedback_comparison(ExperimentConfig::from_json(uniform)), std::invalid_argument);
}

TEST_CASE("feedback comparison under atoms: diagnostic drops below one") {
    nlohmann::json j = small_sweep_config();
    j["distribution"] = {{"kind", "boundary-atom"}, {"p_atom", 0.3}};
    j["m_values"] = {256};
    j["trials"] = 3;
    const FeedbackComparisonResult result = run_feedback_comparison(ExperimentConfig::from_json(j));
    CHECK(result.mean_lambda_ratio < 1.0);
    CHECK(result.feedback.per_m[0].mse_mean < result.literal.per_m[0].mse_mean);
}

TEST_CASE("dimension comparison: shared intrinsic draws and n policy") {
    nlohmann::json j = small_sweep_config();
    j["ambient_dims"] = {3, 6};
    j["rotation_seed"] = 7;
    j["m_values"] = {27, 64};
    const DimensionComparisonResult result = run_dimension_comparison(ExperimentConfig::from_json(j));
    REQUIRE(result.sweeps.size() == 2);
    CHECK(result.ambient_dims == std::vector<int>{3, 6});
    for (std::size_t i = 0; i < result.sweeps[0].per_m.size(); ++i) {
        CHECK(result.sweeps[0].per_m[i].n_used == result.sweeps[1].per_m[i].n_used);
        CHECK(result.sweeps[0].per_m[i].m == result.sweeps[1].per_m[i].m);
    }
}

TEST_CASE("verification suite structure") {
    VerifyOptions options;
    options.binomial_trials = 10000;
    options.decomposition_trials = 500;
    options.decomposition_m = 30;
    const nlohmann::json reports = run_verification(options);
    REQUIRE(reports.is_array());
    CHECK(reports.size() == 26);  // 12 grid cells x {bound, exact-pmf} + 2 bias-variance checks
    for (const auto& report : reports) {
        CHECK(report.contains("name"));
        CHECK(report.contains("estimate"));
        CHECK(report.contains("std_error"));
        CHECK(report.at("pass").is_boolean());
    }
}

TEST_CASE("config file loading applies environment overrides") {
    const std::string path = "harness_config_test.json";
    write_json_file(path, small_sweep_config());
    setenv("LOCALNET_TEST_POINTS", "128", 1);
    const ExperimentConfig config = load_config_file(path);
    unsetenv("LOCALNET_TEST_POINTS");
    CHECK(config.test_points == 128);
    std::remove(path.c_str());
    CHECK_THROWS(load_config_file("does_not_exist_12345.json"));
}
