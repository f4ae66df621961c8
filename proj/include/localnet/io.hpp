#ifndef LOCALNET_IO_HPP
#define LOCALNET_IO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "localnet/estimator.hpp"
#include "localnet/geometry.hpp"

namespace localnet {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// decimal rendering with 17 significant digits (round-trip safe)
std::string format_double(double v);

// dataset CSV: header x_1,...,x_D,y, one row per sample in generation order
void write_dataset_csv(const std::string& path, const SampleSet& set);

struct Dataset {
    std::vector<AmbientPoint> points;
    std::vector<double> ys;
};
Dataset read_dataset_csv(const std::string& path);

// query CSV: header x_1,...,x_D (a dataset file works too; the y column is ignored)
std::vector<AmbientPoint> read_queries_csv(const std::string& path);

struct PredictionRow {
    AmbientPoint x;
    double prediction = 0.0;
    std::string mode;
    std::size_t lambda_x = 0;
    std::size_t lambda_xs = 0;
    std::size_t lambda_xs_prime = 0;
};
void write_predictions_csv(const std::string& path, const std::vector<PredictionRow>& rows);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace localnet

#endif
