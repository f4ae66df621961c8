// Command-line front end. Links the shared C API only.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "localnet.h"

namespace {

int report(localnet_status status, const char* action) {
    if (status == LOCALNET_OK) return 0;
    std::fprintf(stderr, "localnet %s failed: %s\n", action, localnet_last_error());
    return static_cast<int>(status);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "localnet: cannot open config '%s'\n", path.c_str());
        std::exit(1);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

localnet_mode parse_mode(const std::string& name) {
    if (name == "literal") return LOCALNET_MODE_LITERAL;
    if (name == "interior") return LOCALNET_MODE_INTERIOR;
    if (name == "feedback") return LOCALNET_MODE_FEEDBACK;
    if (name == "feedback-ungated") return LOCALNET_MODE_FEEDBACK_UNGATED;
    std::fprintf(stderr, "localnet: unknown mode '%s' (use literal|interior|feedback|feedback-ungated)\n",
                 name.c_str());
    std::exit(1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"localnet: manifold-localized deep-net regression"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, est_path, queries_path;
    std::string mode_name = "feedback";
    std::string format = "json";

    auto* gen = app.add_subcommand("gen", "generate a dataset CSV");
    gen->add_option("--config", config_path, "config JSON file")->envname("LOCALNET_CONFIG")->required();
    gen->add_option("--out", out_path, "output CSV path")->envname("LOCALNET_OUT")->required();

    auto* fit = app.add_subcommand("fit", "build an estimator from a dataset");
    fit->add_option("--config", config_path, "config JSON file")->envname("LOCALNET_CONFIG")->required();
    fit->add_option("--data", data_path, "dataset CSV path")->envname("LOCALNET_DATA")->required();
    fit->add_option("--out", out_path, "output estimator JSON path")->envname("LOCALNET_OUT")->required();

    auto* predict = app.add_subcommand("predict", "evaluate an estimator on query points");
    predict->add_option("--est", est_path, "estimator JSON path")->envname("LOCALNET_EST")->required();
    predict->add_option("--queries", queries_path, "queries CSV path")->envname("LOCALNET_QUERIES")->required();
    predict->add_option("--mode", mode_name, "literal|interior|feedback|feedback-ungated")
        ->envname("LOCALNET_MODE")
        ->capture_default_str();
    predict->add_option("--out", out_path, "output CSV path")->envname("LOCALNET_OUT")->required();

    auto* rates = app.add_subcommand("rates", "run the learning-rate sweep");
    rates->add_option("--config", config_path, "config JSON file")->envname("LOCALNET_CONFIG")->required();
    rates->add_option("--out", out_path, "output path")->envname("LOCALNET_OUT")->required();
    rates->add_option("--format", format, "json|csv")->envname("LOCALNET_FORMAT")->capture_default_str();

    auto* cmp_fb = app.add_subcommand("compare-feedback", "literal vs feedback under the configured distribution");
    cmp_fb->add_option("--config", config_path, "config JSON file")->envname("LOCALNET_CONFIG")->required();
    cmp_fb->add_option("--out", out_path, "output JSON path")->envname("LOCALNET_OUT")->required();

    auto* cmp_dims = app.add_subcommand("compare-dims", "rate sweeps across ambient re-embeddings");
    cmp_dims->add_option("--config", config_path, "config JSON file")->envname("LOCALNET_CONFIG")->required();
    cmp_dims->add_option("--out", out_path, "output JSON path")->envname("LOCALNET_OUT")->required();

    auto* verify = app.add_subcommand("verify", "Monte-Carlo verification suite");
    verify->add_option("--config", config_path, "optional config JSON file")->envname("LOCALNET_CONFIG");
    verify->add_option("--out", out_path, "output JSON path")->envname("LOCALNET_OUT")->required();

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed())
        return report(localnet_generate(read_file(config_path).c_str(), out_path.c_str()), "gen");
    if (fit->parsed())
        return report(localnet_fit(read_file(config_path).c_str(), data_path.c_str(), out_path.c_str()), "fit");
    if (predict->parsed()) {
        localnet_estimator* est = nullptr;
        int rc = report(localnet_estimator_open(est_path.c_str(), &est), "predict (open)");
        if (rc != 0) return rc;
        rc = report(localnet_predict_csv(est, queries_path.c_str(), parse_mode(mode_name), out_path.c_str()),
                    "predict");
        localnet_estimator_close(est);
        return rc;
    }
    if (rates->parsed())
        return report(localnet_rates(read_file(config_path).c_str(), out_path.c_str(), format.c_str()), "rates");
    if (cmp_fb->parsed())
        return report(localnet_compare_feedback(read_file(config_path).c_str(), out_path.c_str()),
                      "compare-feedback");
    if (cmp_dims->parsed())
        return report(localnet_compare_dims(read_file(config_path).c_str(), out_path.c_str()), "compare-dims");
    if (verify->parsed()) {
        const std::string config = config_path.empty() ? "" : read_file(config_path);
        return report(localnet_verify(config.empty() ? nullptr : config.c_str(), out_path.c_str()), "verify");
    }
    return 1;
}
