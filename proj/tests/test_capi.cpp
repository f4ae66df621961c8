#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "localnet.h"

namespace {

const char* kConfig = R"({
  "manifold": {"kind": "circle", "radius": 0.9},
  "target": {"kind": "coordinate", "axis": 0},
  "noise": {"kind": "uniform", "half_width": 0.2},
  "m": 200,
  "m_values": [27, 64, 125],
  "trials": 2,
  "mode": "feedback",
  "seed": 424242,
  "test_points": 256,
  "atlas": {"assignment_samples": 20000, "cover_samples": 1024}
})";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempFile {
    explicit TempFile(std::string name) : path(std::move(name)) {}
    ~TempFile() { std::remove(path.c_str()); }
    std::string path;
};

}  // namespace

TEST_CASE("version and error state") {
    CHECK(std::strlen(localnet_version()) > 0);
    CHECK(localnet_generate(nullptr, "x.csv") == LOCALNET_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(localnet_last_error()) > 0);
    CHECK(localnet_generate("{not json", "x.csv") == LOCALNET_ERR_CONFIG);
    CHECK(localnet_rates(kConfig, nullptr, "json") == LOCALNET_ERR_INVALID_ARGUMENT);
}

TEST_CASE("generate, fit, predict round trip through the C surface") {
    TempFile data("capi_data.csv");
    TempFile est_path("capi_est.json");
    TempFile pred("capi_pred.csv");

    REQUIRE(localnet_generate(kConfig, data.path.c_str()) == LOCALNET_OK);
    {
        std::ifstream in(data.path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "x_1,x_2,y");
        std::size_t rows = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 200);
    }

    REQUIRE(localnet_fit(kConfig, data.path.c_str(), est_path.path.c_str()) == LOCALNET_OK);

    localnet_estimator* est = nullptr;
    REQUIRE(localnet_estimator_open(est_path.path.c_str(), &est) == LOCALNET_OK);
    int dim = 0;
    CHECK(localnet_estimator_ambient_dim(est, &dim) == LOCALNET_OK);
    CHECK(dim == 2);

    const double x[2] = {0.9, 0.0};
    double prediction = 0.0;
    CHECK(localnet_estimator_predict(est, x, 2, LOCALNET_MODE_FEEDBACK, &prediction) == LOCALNET_OK);
    CHECK(std::fabs(prediction - 0.9) < 0.2);  // local mean of x_1 +- noise near theta=0

    size_t lx = 0, lxs = 0, lxsp = 0;
    CHECK(localnet_estimator_lambda(est, x, 2, &lx, &lxs, &lxsp) == LOCALNET_OK);
    CHECK(lx >= 1);
    CHECK(lxsp <= lxs);

    CHECK(localnet_estimator_predict(est, x, 3, LOCALNET_MODE_FEEDBACK, &prediction) ==
          LOCALNET_ERR_INVALID_ARGUMENT);

    REQUIRE(localnet_predict_csv(est, data.path.c_str(), LOCALNET_MODE_INTERIOR, pred.path.c_str()) ==
            LOCALNET_OK);
    {
        std::ifstream in(pred.path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "x_1,x_2,prediction,mode,lambda_x,lambda_xs,lambda_xs_prime");
    }

    localnet_estimator_close(est);
    CHECK(localnet_estimator_open("missing_file_xyz.json", &est) == LOCALNET_ERR_IO);
}

TEST_CASE("rates are byte-identical across reruns") {
    TempFile a("capi_rates_a.json");
    TempFile b("capi_rates_b.json");
    REQUIRE(localnet_rates(kConfig, a.path.c_str(), "json") == LOCALNET_OK);
    REQUIRE(localnet_rates(kConfig, b.path.c_str(), "json") == LOCALNET_OK);
    const std::string first = slurp(a.path);
    CHECK_FALSE(first.empty());
    CHECK(first == slurp(b.path));

    TempFile c("capi_rates_c.csv");
    REQUIRE(localnet_rates(kConfig, c.path.c_str(), "csv") == LOCALNET_OK);
    CHECK(slurp(c.path).rfind("m,n_used,", 0) == 0);
}

TEST_CASE("comparison endpoints write result documents") {
    const char* atom_config = R"({
      "manifold": {"kind": "circle", "radius": 0.9},
      "target": {"kind": "coordinate", "axis": 0},
      "noise": {"kind": "uniform", "half_width": 0.2},
      "distribution": {"kind": "boundary-atom", "p_atom": 0.3},
      "m_values": [128],
      "trials": 2,
      "seed": 5150,
      "test_points": 128,
      "atlas": {"assignment_samples": 20000, "cover_samples": 1024}
    })";
    TempFile fb("capi_fb.json");
    REQUIRE(localnet_compare_feedback(atom_config, fb.path.c_str()) == LOCALNET_OK);
    const std::string fb_text = slurp(fb.path);
    CHECK(fb_text.find("mean_lambda_ratio") != std::string::npos);
    CHECK(fb_text.find("mse_ratio_literal_over_feedback") != std::string::npos);

    const char* dims_config = R"({
      "manifold": {"kind": "circle", "radius": 0.9},
      "target": {"kind": "coordinate", "axis": 0},
      "noise": {"kind": "uniform", "half_width": 0.2},
      "m_values": [64, 128],
      "trials": 2,
      "ambient_dims": [3, 5],
      "rotation_seed": 3,
      "seed": 5151,
      "test_points": 128,
      "atlas": {"assignment_samples": 20000, "cover_samples": 1024}
    })";
    TempFile dims("capi_dims.json");
    REQUIRE(localnet_compare_dims(dims_config, dims.path.c_str()) == LOCALNET_OK);
    CHECK(slurp(dims.path).find("ambient_dim") != std::string::npos);

    // boundary-atom generation infers the grid from a freshly built atlas
    const char* gen_config = R"({
      "manifold": {"kind": "circle", "radius": 0.9},
      "target": {"kind": "coordinate", "axis": 0},
      "noise": {"kind": "uniform", "half_width": 0.2},
      "distribution": {"kind": "boundary-atom", "p_atom": 1.0},
      "m": 5,
      "seed": 5152,
      "atlas": {"assignment_samples": 20000, "cover_samples": 1024}
    })";
    TempFile atoms("capi_atoms.csv");
    REQUIRE(localnet_generate(gen_config, atoms.path.c_str()) == LOCALNET_OK);
    std::ifstream in(atoms.path);
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("verify emits a report array") {
    TempFile out("capi_verify.json");
    const char* verify_config = R"({"binomial_trials": 10000, "decomposition_trials": 300, "decomposition_m": 20})";
    REQUIRE(localnet_verify(verify_config, out.path.c_str()) == LOCALNET_OK);
    const std::string text = slurp(out.path);
    CHECK(text.find("\"pass\"") != std::string::npos);
    CHECK(text.find("binomial-reciprocal bound") != std::string::npos);
    CHECK(text.find("bias-variance cross-term") != std::string::npos);
}
