#include "localnet/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace localnet {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_dataset_csv(const std::string& path, const SampleSet& set) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const std::size_t D = set.points.empty() ? 0 : set.points.front().size();
    for (std::size_t l = 0; l < D; ++l) out << "x_" << (l + 1) << ",";
    out << "y\n";
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        for (double c : set.points[i]) out << format_double(c) << ",";
        out << format_double(set.ys[i]) << "\n";
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream is(line);
    while (std::getline(is, part, ',')) parts.push_back(part);
    return parts;
}
}  // namespace

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset file '" + path + "'");
    const auto header = split_csv_line(line);
    if (header.empty() || header.back() != "y")
        throw IoError("dataset '" + path + "': expected trailing y column");
    const std::size_t D = header.size() - 1;
    Dataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        if (parts.size() != D + 1)
            throw IoError("dataset '" + path + "': wrong column count on line " + std::to_string(line_no));
        AmbientPoint x(D);
        for (std::size_t l = 0; l < D; ++l) x[l] = std::stod(parts[l]);
        data.points.push_back(std::move(x));
        data.ys.push_back(std::stod(parts[D]));
    }
    return data;
}

std::vector<AmbientPoint> read_queries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty query file '" + path + "'");
    const auto header = split_csv_line(line);
    std::size_t D = header.size();
    bool has_y = !header.empty() && header.back() == "y";
    if (has_y) --D;
    if (D == 0) throw IoError("query file '" + path + "': no coordinate columns");
    std::vector<AmbientPoint> queries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        if (parts.size() < D) throw IoError("query file '" + path + "': short row");
        AmbientPoint x(D);
        for (std::size_t l = 0; l < D; ++l) x[l] = std::stod(parts[l]);
        queries.push_back(std::move(x));
    }
    return queries;
}

void write_predictions_csv(const std::string& path, const std::vector<PredictionRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const std::size_t D = rows.empty() ? 0 : rows.front().x.size();
    for (std::size_t l = 0; l < D; ++l) out << "x_" << (l + 1) << ",";
    out << "prediction,mode,lambda_x,lambda_xs,lambda_xs_prime\n";
    for (const auto& row : rows) {
        for (double c : row.x) out << format_double(c) << ",";
        out << format_double(row.prediction) << "," << row.mode << "," << row.lambda_x << ","
            << row.lambda_xs << "," << row.lambda_xs_prime << "\n";
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace localnet
