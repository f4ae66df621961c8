#include "localnet/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "localnet/io.hpp"

extern char** environ;

namespace localnet {

namespace {
constexpr std::uint64_t kStreamAtlas = 0x61746c6173ULL;
constexpr std::uint64_t kStreamTest = 0x74657374ULL;
}  // namespace

nlohmann::json apply_env_overrides(nlohmann::json config) {
    const std::string prefix = "LOCALNET_";
    for (char** env = environ; env && *env; ++env) {
        const std::string entry(*env);
        if (entry.rfind(prefix, 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = entry.substr(prefix.size(), eq - prefix.size());
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        const std::string value = entry.substr(eq + 1);
        nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
        if (parsed.is_discarded()) parsed = value;  // plain string
        config[key] = parsed;
    }
    return config;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.raw = j;
    nlohmann::json mj = j.value("manifold", nlohmann::json{{"kind", "circle"}, {"radius", 0.9}});
    c.manifold = std::make_shared<Manifold>(Manifold::from_json(mj));
    c.target = TargetFunction::from_json(j.value("target", nlohmann::json{{"kind", "coordinate"}, {"axis", 0}}),
                                         *c.manifold);
    c.noise = NoiseSpec::from_json(j.value("noise", nlohmann::json{{"kind", "uniform"}, {"half_width", 0.2}}));
    c.distribution = InputDistribution::from_json(j.value("distribution", nlohmann::json{{"kind", "uniform"}}));
    c.m = j.value("m", std::size_t{1024});
    c.m_values = j.value("m_values", std::vector<std::size_t>{});
    for (std::size_t i = 1; i < c.m_values.size(); ++i)
        if (c.m_values[i] <= c.m_values[i - 1])
            throw std::invalid_argument("config: m_values must be strictly increasing");
    c.trials = j.value("trials", std::size_t{1});
    if (c.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    c.mode = DeepNetEstimator::mode_from_name(j.value("mode", std::string("feedback")));
    c.query_gated = j.value("query_gated", true);
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("atlas")) c.atlas_options = AtlasOptions::from_json(j.at("atlas"));
    c.test_points = j.value("test_points", std::size_t{2048});
    c.ambient_dims = j.value("ambient_dims", std::vector<int>{});
    c.rotation_seed = j.value("rotation_seed", std::uint64_t{0});
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    return ExperimentConfig::from_json(apply_env_overrides(read_json_file(path)));
}

// ---------------------------------------------------------------------------
// sweeps

namespace {

struct SweepOutput {
    std::map<DeepNetEstimator::Mode, RateResult> results;
    std::vector<double> lambda_ratio_per_m;
};

void fit_slope(RateResult& result) {
    std::size_t usable = 0;
    for (const auto& p : result.per_m)
        if (p.mse_mean > 0.0) ++usable;
    if (usable < 2 || usable != result.per_m.size()) {
        result.slope_defined = false;  // degenerate sweep (e.g. exact fit, mse == 0)
        result.slope = std::numeric_limits<double>::quiet_NaN();
        result.intercept = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(result.per_m.size());
    for (const auto& p : result.per_m) {
        const double x = std::log(static_cast<double>(p.m));
        const double y = std::log(p.mse_mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = count * sxx - sx * sx;
    result.slope = (count * sxy - sx * sy) / denom;
    result.intercept = (sy - result.slope * sx) / count;
    result.slope_defined = true;
}

SweepOutput run_sweep_internal(const ExperimentConfig& config,
                               const std::vector<DeepNetEstimator::Mode>& modes, bool collect_lambda) {
    if (config.m_values.empty()) throw std::invalid_argument("rate sweep: m_values must not be empty");
    const Manifold& manifold = *config.manifold;
    const int d = manifold.intrinsic_dim();
    const double s = config.target.smoothness;

    auto atlas = std::make_shared<Atlas>(
        build_atlas(config.manifold, config.atlas_options, hash64(config.seed, kStreamAtlas)));

    InputDistribution dist = config.distribution;
    if (dist.kind == InputDistribution::Kind::BoundaryAtom && dist.grid_q == 0) dist.grid_q = atlas->q_star;

    SweepOutput out;
    for (auto mode : modes) {
        out.results[mode].theory_slope = -2.0 * s / (2.0 * s + static_cast<double>(d));
    }

    for (std::size_t m : config.m_values) {
        std::map<DeepNetEstimator::Mode, RatePoint> points;
        const int n = choose_n(m, s, d);
        for (auto mode : modes) {
            points[mode].m = m;
            points[mode].n_used = n;
        }
        double lambda_sum = 0.0;
        std::size_t lambda_count = 0;

        for (std::size_t trial = 0; trial < config.trials; ++trial) {
            const std::uint64_t trial_seed = hash64(config.seed, m, trial);
            const SampleSet set = draw_sample_set(manifold, config.target, config.noise, m, trial_seed, dist);
            const DeepNetEstimator est(atlas, set, n);
            const std::vector<AmbientPoint> test_points =
                sample_inputs(manifold, config.test_points, dist, hash64(trial_seed, kStreamTest));

            std::map<DeepNetEstimator::Mode, double> sq_err;
            for (auto mode : modes) sq_err[mode] = 0.0;
            for (const auto& x : test_points) {
                const double truth = config.target(x);
                for (auto mode : modes) {
                    const double pred = est.predict(x, mode, config.query_gated);
                    const double e = pred - truth;
                    sq_err[mode] += e * e;
                }
                if (collect_lambda) {
                    const LambdaSets ls = est.lambda_sets(x);
                    if (ls.card_xs() > 0) {
                        lambda_sum += static_cast<double>(ls.card_xs_prime()) / static_cast<double>(ls.card_xs());
                        ++lambda_count;
                    }
                }
            }
            for (auto mode : modes)
                points[mode].per_trial.push_back(sq_err[mode] / static_cast<double>(config.test_points));
        }

        for (auto mode : modes) {
            RatePoint& p = points[mode];
            double sum = 0.0;
            for (double v : p.per_trial) sum += v;
            p.mse_mean = sum / static_cast<double>(p.per_trial.size());
            double ss = 0.0;
            for (double v : p.per_trial) ss += (v - p.mse_mean) * (v - p.mse_mean);
            p.mse_std = p.per_trial.size() > 1 ? std::sqrt(ss / static_cast<double>(p.per_trial.size() - 1)) : 0.0;
            out.results[mode].per_m.push_back(std::move(p));
        }
        out.lambda_ratio_per_m.push_back(lambda_count > 0 ? lambda_sum / static_cast<double>(lambda_count) : 1.0);
    }

    for (auto mode : modes) fit_slope(out.results[mode]);
    return out;
}

}  // namespace

RateResult run_rate_sweep(const ExperimentConfig& config) {
    return run_sweep_internal(config, {config.mode}, false).results.at(config.mode);
}

FeedbackComparisonResult run_feedback_comparison(const ExperimentConfig& config) {
    if (config.distribution.kind != InputDistribution::Kind::BoundaryAtom)
        throw std::invalid_argument("run_feedback_comparison: needs a boundary-atom distribution");
    SweepOutput out = run_sweep_internal(
        config, {DeepNetEstimator::Mode::Literal, DeepNetEstimator::Mode::Feedback}, true);
    FeedbackComparisonResult result;
    result.literal = out.results.at(DeepNetEstimator::Mode::Literal);
    result.feedback = out.results.at(DeepNetEstimator::Mode::Feedback);
    for (std::size_t i = 0; i < result.literal.per_m.size(); ++i) {
        const double fb = result.feedback.per_m[i].mse_mean;
        result.mse_ratio.push_back(fb > 0.0 ? result.literal.per_m[i].mse_mean / fb
                                            : std::numeric_limits<double>::quiet_NaN());
    }
    result.lambda_ratio_per_m = out.lambda_ratio_per_m;
    double sum = 0.0;
    for (double v : out.lambda_ratio_per_m) sum += v;
    result.mean_lambda_ratio =
        out.lambda_ratio_per_m.empty() ? 1.0 : sum / static_cast<double>(out.lambda_ratio_per_m.size());
    return result;
}

DimensionComparisonResult run_dimension_comparison(const ExperimentConfig& config) {
    if (config.ambient_dims.size() < 2)
        throw std::invalid_argument("run_dimension_comparison: need at least two ambient_dims");
    const Manifold& base =
        config.manifold->kind() == ManifoldKind::ProductEmbedding ? config.manifold->base() : *config.manifold;
    DimensionComparisonResult result;
    for (int D : config.ambient_dims) {
        ExperimentConfig sub = config;
        if (D == base.ambient_dim() && config.rotation_seed == 0) {
            sub.manifold = std::make_shared<Manifold>(base);
        } else {
            sub.manifold = std::make_shared<Manifold>(
                Manifold::product_embedding(base, D, config.rotation_seed == 0 ? config.seed : config.rotation_seed));
        }
        // target axes stay valid: re-resolve the target against the new manifold
        sub.target = TargetFunction::from_json(config.target.to_json(), *sub.manifold);
        result.ambient_dims.push_back(D);
        result.sweeps.push_back(run_rate_sweep(sub));
    }
    return result;
}

// ---------------------------------------------------------------------------
// emission

nlohmann::json RateResult::to_json() const {
    nlohmann::json per_m_json = nlohmann::json::array();
    for (const auto& p : per_m) {
        nlohmann::json pj;
        pj["m"] = p.m;
        pj["n_used"] = p.n_used;
        pj["mse_mean"] = p.mse_mean;
        pj["mse_std"] = p.mse_std;
        pj["log2_m"] = std::log2(static_cast<double>(p.m));
        if (p.mse_mean > 0.0) pj["log_mse"] = std::log(p.mse_mean);
        else pj["log_mse"] = nullptr;
        pj["per_trial"] = p.per_trial;
        per_m_json.push_back(std::move(pj));
    }
    nlohmann::json j;
    j["per_m"] = std::move(per_m_json);
    j["slope_defined"] = slope_defined;
    if (slope_defined) {
        j["slope"] = slope;
        j["intercept"] = intercept;
    } else {
        j["slope"] = nullptr;
        j["intercept"] = nullptr;
    }
    j["theory_slope"] = theory_slope;
    return j;
}

std::string RateResult::to_csv() const {
    std::ostringstream os;
    os << "m,n_used,mse_mean,mse_std,log2_m,log_mse\n";
    for (const auto& p : per_m) {
        os << p.m << "," << p.n_used << "," << format_double(p.mse_mean) << "," << format_double(p.mse_std)
           << "," << format_double(std::log2(static_cast<double>(p.m))) << ","
           << (p.mse_mean > 0.0 ? format_double(std::log(p.mse_mean)) : "nan") << "\n";
    }
    return os.str();
}

void emit_results(const RateResult& result, const std::string& path, const std::string& format) {
    if (format == "json") {
        write_json_file(path, result.to_json());
    } else if (format == "csv") {
        write_text_file(path, result.to_csv());
    } else {
        throw std::invalid_argument("emit_results: format must be json or csv");
    }
}

nlohmann::json FeedbackComparisonResult::to_json() const {
    nlohmann::json j;
    j["literal"] = literal.to_json();
    j["feedback"] = feedback.to_json();
    j["mse_ratio_literal_over_feedback"] = mse_ratio;
    j["lambda_ratio_per_m"] = lambda_ratio_per_m;
    j["mean_lambda_ratio"] = mean_lambda_ratio;
    return j;
}

nlohmann::json DimensionComparisonResult::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
        nlohmann::json entry;
        entry["ambient_dim"] = ambient_dims[i];
        entry["result"] = sweeps[i].to_json();
        j.push_back(std::move(entry));
    }
    return nlohmann::json{{"sweeps", std::move(j)}};
}

// ---------------------------------------------------------------------------
// verification

nlohmann::json run_verification(const VerifyOptions& options) {
    nlohmann::json reports = nlohmann::json::array();

    const std::size_t ms[] = {10, 100, 1000};
    const double ps[] = {0.01, 0.05, 0.1, 0.5};
    for (std::size_t m : ms) {
        for (double p : ps) {
            const BinomialReciprocalReport rep = binomial_reciprocal_check(m, p, options.binomial_trials, hash64(options.seed, m * 1000, static_cast<std::uint64_t>(p * 1e6)));
            reports.push_back(rep.bound_check.to_json());
            reports.push_back(rep.exact_check.to_json());
        }
    }

    auto manifold = std::make_shared<Manifold>(Manifold::circle(0.9));
    const TargetFunction target = TargetFunction::coordinate(0, *manifold);
    const NoiseSpec noise{NoiseKind::Uniform, 0.2, 0.1};
    auto atlas = std::make_shared<Atlas>(build_atlas(manifold, AtlasOptions{}, hash64(options.seed, kStreamAtlas)));
    const BiasVarianceReport rep2 =
        bias_variance_check(atlas, target, noise, options.decomposition_m, options.decomposition_trials, hash64(options.seed, 0x6c32ULL));
    reports.push_back(rep2.cross_term.to_json());
    reports.push_back(rep2.decomposition.to_json());
    return reports;
}

}  // namespace localnet
