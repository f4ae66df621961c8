#include "localnet.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <functional>
#include <string>

#include "localnet/harness.hpp"
#include "localnet/io.hpp"

namespace {

thread_local std::string g_last_error;

localnet_status fail(localnet_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

localnet_status guard(const std::function<void()>& body) {
    try {
        body();
        g_last_error.clear();
        return LOCALNET_OK;
    } catch (const std::invalid_argument& e) {
        return fail(LOCALNET_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::domain_error& e) {
        return fail(LOCALNET_ERR_DOMAIN, e.what());
    } catch (const localnet::IoError& e) {
        return fail(LOCALNET_ERR_IO, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(LOCALNET_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(LOCALNET_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(LOCALNET_ERR_INTERNAL, "unknown error");
    }
}

localnet::ExperimentConfig parse_config(const char* config_json) {
    if (!config_json) throw std::invalid_argument("config_json must not be null");
    nlohmann::json doc = nlohmann::json::parse(config_json);
    return localnet::ExperimentConfig::from_json(localnet::apply_env_overrides(std::move(doc)));
}

struct ModeSpec {
    localnet::DeepNetEstimator::Mode mode;
    bool query_gated;
    const char* name;
};

ModeSpec to_mode(localnet_mode mode) {
    switch (mode) {
        case LOCALNET_MODE_LITERAL: return {localnet::DeepNetEstimator::Mode::Literal, true, "literal"};
        case LOCALNET_MODE_INTERIOR: return {localnet::DeepNetEstimator::Mode::Interior, true, "interior"};
        case LOCALNET_MODE_FEEDBACK: return {localnet::DeepNetEstimator::Mode::Feedback, true, "feedback"};
        case LOCALNET_MODE_FEEDBACK_UNGATED:
            return {localnet::DeepNetEstimator::Mode::Feedback, false, "feedback-ungated"};
    }
    throw std::invalid_argument("unknown prediction mode");
}

}  // namespace

struct localnet_estimator {
    localnet::DeepNetEstimator impl;
};

extern "C" {

const char* localnet_version(void) { return "0.1.0"; }

const char* localnet_last_error(void) { return g_last_error.c_str(); }

localnet_status localnet_generate(const char* config_json, const char* out_csv_path) {
    return guard([&] {
        if (!out_csv_path) throw std::invalid_argument("out_csv_path must not be null");
        const auto config = parse_config(config_json);
        localnet::InputDistribution dist = config.distribution;
        if (dist.kind == localnet::InputDistribution::Kind::BoundaryAtom && dist.grid_q == 0) {
            const auto atlas = localnet::build_atlas(config.manifold, config.atlas_options,
                                                     localnet::hash64(config.seed, 0x61746c6173ULL));
            dist.grid_q = atlas.q_star;
        }
        const localnet::SampleSet set =
            localnet::draw_sample_set(*config.manifold, config.target, config.noise, config.m, config.seed, dist);
        localnet::write_dataset_csv(out_csv_path, set);
    });
}

localnet_status localnet_fit(const char* config_json, const char* data_csv_path,
                             const char* out_estimator_path) {
    return guard([&] {
        if (!data_csv_path || !out_estimator_path)
            throw std::invalid_argument("data_csv_path and out_estimator_path must not be null");
        const auto config = parse_config(config_json);
        const localnet::Dataset data = localnet::read_dataset_csv(data_csv_path);
        if (data.points.empty()) throw std::invalid_argument("fit: dataset is empty");
        if (static_cast<int>(data.points.front().size()) != config.manifold->ambient_dim())
            throw std::invalid_argument("fit: dataset dimension does not match the configured manifold");

        auto atlas = std::make_shared<localnet::Atlas>(localnet::build_atlas(
            config.manifold, config.atlas_options, localnet::hash64(config.seed, 0x61746c6173ULL)));
        localnet::SampleSet set;
        set.points = data.points;
        set.ys = data.ys;
        set.seed = config.seed;
        set.bound_M = config.target.sup_bound + config.noise.bound();
        for (double y : set.ys) set.bound_M = std::max(set.bound_M, std::fabs(y));
        set.manifold_descriptor = config.manifold->to_json();
        const int n = localnet::choose_n(set.points.size(), config.target.smoothness,
                                         config.manifold->intrinsic_dim());
        const localnet::DeepNetEstimator est(atlas, set, n);
        localnet::write_json_file(out_estimator_path, est.to_json());
    });
}

localnet_status localnet_estimator_open(const char* estimator_json_path, localnet_estimator** out) {
    return guard([&] {
        if (!estimator_json_path || !out)
            throw std::invalid_argument("estimator_json_path and out must not be null");
        auto doc = localnet::read_json_file(estimator_json_path);
        *out = new localnet_estimator{localnet::DeepNetEstimator::from_json(doc)};
    });
}

void localnet_estimator_close(localnet_estimator* est) { delete est; }

localnet_status localnet_estimator_ambient_dim(const localnet_estimator* est, int* out_dim) {
    return guard([&] {
        if (!est || !out_dim) throw std::invalid_argument("est and out_dim must not be null");
        *out_dim = est->impl.atlas().manifold->ambient_dim();
    });
}

localnet_status localnet_estimator_predict(const localnet_estimator* est, const double* x, size_t dim,
                                           localnet_mode mode, double* out_prediction) {
    return guard([&] {
        if (!est || !x || !out_prediction) throw std::invalid_argument("null argument");
        if (static_cast<int>(dim) != est->impl.atlas().manifold->ambient_dim())
            throw std::invalid_argument("query dimension does not match the estimator");
        const localnet::AmbientPoint point(x, x + dim);
        const ModeSpec spec = to_mode(mode);
        *out_prediction = est->impl.predict(point, spec.mode, spec.query_gated);
    });
}

localnet_status localnet_estimator_lambda(const localnet_estimator* est, const double* x, size_t dim,
                                          size_t* out_lambda_x, size_t* out_lambda_xs,
                                          size_t* out_lambda_xs_prime) {
    return guard([&] {
        if (!est || !x || !out_lambda_x || !out_lambda_xs || !out_lambda_xs_prime)
            throw std::invalid_argument("null argument");
        if (static_cast<int>(dim) != est->impl.atlas().manifold->ambient_dim())
            throw std::invalid_argument("query dimension does not match the estimator");
        const localnet::AmbientPoint point(x, x + dim);
        const localnet::LambdaSets ls = est->impl.lambda_sets(point);
        *out_lambda_x = ls.card_x();
        *out_lambda_xs = ls.card_xs();
        *out_lambda_xs_prime = ls.card_xs_prime();
    });
}

localnet_status localnet_predict_csv(const localnet_estimator* est, const char* queries_csv_path,
                                     localnet_mode mode, const char* out_csv_path) {
    return guard([&] {
        if (!est || !queries_csv_path || !out_csv_path) throw std::invalid_argument("null argument");
        const auto queries = localnet::read_queries_csv(queries_csv_path);
        const ModeSpec spec = to_mode(mode);
        std::vector<localnet::PredictionRow> rows;
        rows.reserve(queries.size());
        for (const auto& x : queries) {
            localnet::PredictionRow row;
            row.x = x;
            row.prediction = est->impl.predict(x, spec.mode, spec.query_gated);
            row.mode = spec.name;
            const localnet::LambdaSets ls = est->impl.lambda_sets(x);
            row.lambda_x = ls.card_x();
            row.lambda_xs = ls.card_xs();
            row.lambda_xs_prime = ls.card_xs_prime();
            rows.push_back(std::move(row));
        }
        localnet::write_predictions_csv(out_csv_path, rows);
    });
}

localnet_status localnet_rates(const char* config_json, const char* out_path, const char* format) {
    return guard([&] {
        if (!out_path) throw std::invalid_argument("out_path must not be null");
        const auto config = parse_config(config_json);
        const localnet::RateResult result = localnet::run_rate_sweep(config);
        localnet::emit_results(result, out_path, format ? format : "json");
    });
}

localnet_status localnet_compare_feedback(const char* config_json, const char* out_json_path) {
    return guard([&] {
        if (!out_json_path) throw std::invalid_argument("out_json_path must not be null");
        const auto config = parse_config(config_json);
        const auto result = localnet::run_feedback_comparison(config);
        localnet::write_json_file(out_json_path, result.to_json());
    });
}

localnet_status localnet_compare_dims(const char* config_json, const char* out_json_path) {
    return guard([&] {
        if (!out_json_path) throw std::invalid_argument("out_json_path must not be null");
        const auto config = parse_config(config_json);
        const auto result = localnet::run_dimension_comparison(config);
        localnet::write_json_file(out_json_path, result.to_json());
    });
}

localnet_status localnet_verify(const char* config_json, const char* out_json_path) {
    return guard([&] {
        if (!out_json_path) throw std::invalid_argument("out_json_path must not be null");
        localnet::VerifyOptions options;
        nlohmann::json doc = config_json ? nlohmann::json::parse(config_json) : nlohmann::json::object();
        doc = localnet::apply_env_overrides(std::move(doc));
        options.binomial_trials = doc.value("binomial_trials", options.binomial_trials);
        options.decomposition_trials = doc.value("decomposition_trials", options.decomposition_trials);
        options.decomposition_m = doc.value("decomposition_m", options.decomposition_m);
        options.seed = doc.value("seed", options.seed);
        localnet::write_json_file(out_json_path, localnet::run_verification(options));
    });
}

}  // extern "C"
