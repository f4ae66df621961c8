#ifndef LOCALNET_HARNESS_HPP
#define LOCALNET_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "localnet/estimator.hpp"
#include "localnet/oracle.hpp"

namespace localnet {

// One experiment document: manifold, target, noise, sampling distribution,
// sweep sizes, estimator mode, seeds. Loaded from a single JSON object; any
// top-level key can be overridden through LOCALNET_* environment variables.
struct ExperimentConfig {
    std::shared_ptr<const Manifold> manifold;
    TargetFunction target;
    NoiseSpec noise;
    InputDistribution distribution;
    std::size_t m = 1024;                  // gen / fit
    std::vector<std::size_t> m_values;     // rate sweeps (strictly increasing)
    std::size_t trials = 1;
    DeepNetEstimator::Mode mode = DeepNetEstimator::Mode::Feedback;
    bool query_gated = true;
    std::uint64_t seed = 1;
    AtlasOptions atlas_options;
    std::size_t test_points = 2048;
    std::vector<int> ambient_dims;         // dimension comparison
    std::uint64_t rotation_seed = 0;       // orthogonal map seed for re-embeddings
    nlohmann::json raw;                    // the document as loaded

    static ExperimentConfig from_json(const nlohmann::json& j);
};

// Override top-level config keys from LOCALNET_<KEY> environment variables
// (values parsed as JSON when possible, else taken as strings).
nlohmann::json apply_env_overrides(nlohmann::json config);
ExperimentConfig load_config_file(const std::string& path);

struct RatePoint {
    std::size_t m = 0;
    int n_used = 0;
    double mse_mean = 0.0;
    double mse_std = 0.0;
    std::vector<double> per_trial;
};

struct RateResult {
    std::vector<RatePoint> per_m;
    double slope = 0.0;       // least-squares fit on (log m, log mse_mean)
    double intercept = 0.0;
    bool slope_defined = false;
    double theory_slope = 0.0;  // -2s/(2s+d)

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

RateResult run_rate_sweep(const ExperimentConfig& config);

struct FeedbackComparisonResult {
    RateResult literal;
    RateResult feedback;
    std::vector<double> mse_ratio;          // literal / feedback per m
    std::vector<double> lambda_ratio_per_m; // mean |Lambda'|/|Lambda| over queries
    double mean_lambda_ratio = 1.0;

    nlohmann::json to_json() const;
};

// Same draws, literal vs feedback predictions side by side.
FeedbackComparisonResult run_feedback_comparison(const ExperimentConfig& config);

struct DimensionComparisonResult {
    std::vector<int> ambient_dims;
    std::vector<RateResult> sweeps;  // one per ambient dimension

    nlohmann::json to_json() const;
};

// The same intrinsic manifold re-embedded at several ambient dimensions;
// identical intrinsic draws per trial by construction.
DimensionComparisonResult run_dimension_comparison(const ExperimentConfig& config);

void emit_results(const RateResult& result, const std::string& path, const std::string& format);

struct VerifyOptions {
    std::size_t binomial_trials = 100000;
    std::size_t decomposition_trials = 20000;
    std::size_t decomposition_m = 50;
    std::uint64_t seed = 20240901;
};

// Lemma 1 bound over the m x p grid plus the exact-pmf cross-checks, and the
// Lemma 2 decomposition on a circle; returns an array of McReport objects.
nlohmann::json run_verification(const VerifyOptions& options = {});

}  // namespace localnet

#endif
