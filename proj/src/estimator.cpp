#include "localnet/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "localnet/netcore.hpp"

namespace localnet {

int choose_n(std::size_t m, double s, int d) {
    if (m < 1) throw std::invalid_argument("choose_n: m must be >= 1");
    if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("choose_n: s must lie in (0,1]");
    if (d < 1) throw std::invalid_argument("choose_n: d must be positive");
    const double exponent = 1.0 / (2.0 * s + static_cast<double>(d));
    const double value = std::pow(static_cast<double>(m), exponent);
    const int n = static_cast<int>(std::ceil(value - 1e-12));
    return std::max(1, n);
}

DeepNetEstimator::Mode DeepNetEstimator::mode_from_name(const std::string& name) {
    if (name == "literal") return Mode::Literal;
    if (name == "interior") return Mode::Interior;
    if (name == "feedback") return Mode::Feedback;
    throw std::invalid_argument("unknown prediction mode '" + name + "'");
}

std::string DeepNetEstimator::mode_name(Mode mode) {
    switch (mode) {
        case Mode::Literal: return "literal";
        case Mode::Interior: return "interior";
        case Mode::Feedback: return "feedback";
    }
    return "unknown";
}

std::optional<int> DeepNetEstimator::chart_index_for(const CubeIndex& cube, const AmbientPoint& witness) const {
    auto it = assignment_.find(cube);
    if (it != assignment_.end()) return it->second;
    return atlas_->resolve_cube_chart(cube, witness);
}

DeepNetEstimator::DeepNetEstimator(std::shared_ptr<const Atlas> atlas, const SampleSet& samples, int n) {
    if (!atlas) throw std::invalid_argument("build_estimator: null atlas");
    if (n < 1) throw std::invalid_argument("build_estimator: n must be >= 1");
    atlas_ = std::move(atlas);
    assignment_ = atlas_->assignment;
    table_.n = n;
    table_.membership.resize(samples.size());
    M_ = samples.bound_M;
    ys_ = samples.ys;
    if (samples.points.size() != samples.ys.size())
        throw std::invalid_argument("build_estimator: sample set points/ys size mismatch");

    const int q = atlas_->q_star;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const AmbientPoint& x = samples.points[i];
        const double y = samples.ys[i];
        const auto member_cubes = cubes_containing(x, q);
        if (member_cubes.empty()) {
            std::ostringstream msg;
            msg << "build_estimator: sample " << i << " falls outside the [-1,1]^D grid";
            throw std::runtime_error(msg.str());
        }
        for (const auto& cube : member_cubes) {
            auto it = assignment_.find(cube);
            int chart_idx;
            if (it != assignment_.end()) {
                chart_idx = it->second;
            } else {
                auto resolved = atlas_->resolve_cube_chart(cube, x);
                if (!resolved) {
                    std::ostringstream msg;
                    msg << "build_estimator: sample " << i << " lies in a cube with no chart";
                    throw std::runtime_error(msg.str());
                }
                chart_idx = *resolved;
                assignment_.emplace(cube, chart_idx);
            }
            const Chart& chart = atlas_->charts[static_cast<std::size_t>(chart_idx)];
            const auto mapped = chart.map(x);
            if (!mapped.in_domain) {
                std::ostringstream msg;
                msg << "build_estimator: sample " << i << " escapes its chart ball; delta/q* are inconsistent";
                throw std::runtime_error(msg.str());
            }
            const auto member_cells = cubes_containing(mapped.point, n);
            for (const auto& k : member_cells) {
                CellIndex cell{cube, k};
                CellStats& stats = table_.cells[cell];
                stats.count += 1;
                stats.y_sum += y;
                stats.samples.push_back(i);
                table_.membership[i].push_back(std::move(cell));
            }
            sampled_cubes_.emplace(cube, chart_idx);
        }
    }
    for (auto& cells : table_.membership) std::sort(cells.begin(), cells.end());
    for (const auto& [cell, stats] : table_.cells) {
        table_.total_count += stats.count;
        table_.total_y_sum += stats.y_sum;
    }
}

DeepNetEstimator build_estimator(std::shared_ptr<const Atlas> atlas, const SampleSet& samples, int n) {
    return DeepNetEstimator(std::move(atlas), samples, n);
}

std::vector<CellIndex> DeepNetEstimator::active_cells_gated(const AmbientPoint& x) const {
    std::vector<CellIndex> active;
    for (const auto& cube : cubes_containing(x, atlas_->q_star)) {
        const auto chart_idx = chart_index_for(cube, x);
        if (!chart_idx) continue;  // cube off the covered region: no cells there
        const Chart& chart = atlas_->charts[static_cast<std::size_t>(*chart_idx)];
        const auto mapped = chart.map(x);
        if (!mapped.in_domain) continue;
        for (const auto& k : cubes_containing(mapped.point, table_.n)) active.push_back({cube, k});
    }
    return active;  // cube/cell enumeration is lexicographic already
}

std::vector<CellIndex> DeepNetEstimator::active_cells_ungated(const AmbientPoint& x) const {
    std::vector<CellIndex> active;
    for (const auto& [cube, chart_idx] : sampled_cubes_) {
        const Chart& chart = atlas_->charts[static_cast<std::size_t>(chart_idx)];
        const auto mapped = chart.map(x);
        if (!mapped.in_domain) continue;
        for (const auto& k : cubes_containing(mapped.point, table_.n)) {
            CellIndex cell{cube, k};
            if (table_.cells.count(cell)) active.push_back(std::move(cell));
        }
    }
    return active;
}

double DeepNetEstimator::predict_literal(const AmbientPoint& x) const {
    // printed three-layer form: the denominator sums the sample-side gates
    // over every cell, independent of x
    if (table_.total_count == 0) return 0.0;
    double numerator = 0.0;
    for (const auto& cell : active_cells_ungated(x)) {
        auto it = table_.cells.find(cell);
        if (it != table_.cells.end()) numerator += it->second.y_sum;
    }
    return numerator / static_cast<double>(table_.total_count);
}

double DeepNetEstimator::predict_interior(const AmbientPoint& x) const {
    double numerator = 0.0;
    long long denominator = 0;
    for (const auto& cell : active_cells_gated(x)) {
        auto it = table_.cells.find(cell);
        if (it == table_.cells.end()) continue;
        numerator += it->second.y_sum;
        denominator += it->second.count;
    }
    if (denominator == 0) return 0.0;
    return numerator / static_cast<double>(denominator);
}

double DeepNetEstimator::predict_feedback(const AmbientPoint& x, bool query_gated) const {
    const std::vector<CellIndex> active =
        query_gated ? active_cells_gated(x) : active_cells_ungated(x);
    if (ys_.empty()) {
        // estimator loaded from a document without per-sample lists: the
        // ratio collapses to the per-cell sums
        double numerator = 0.0;
        long long denominator = 0;
        for (const auto& cell : active) {
            auto it = table_.cells.find(cell);
            if (it == table_.cells.end()) continue;
            numerator += it->second.y_sum;
            denominator += it->second.count;
        }
        if (denominator == 0) return 0.0;
        return numerator / static_cast<double>(denominator);
    }
    // Phi sums run sample-major: ascending sample index, then cell order
    std::vector<std::pair<std::size_t, std::size_t>> hits;  // (sample, active-cell rank)
    for (std::size_t rank = 0; rank < active.size(); ++rank) {
        auto it = table_.cells.find(active[rank]);
        if (it == table_.cells.end()) continue;
        for (std::size_t i : it->second.samples) hits.emplace_back(i, rank);
    }
    std::sort(hits.begin(), hits.end());
    double numerator = 0.0;
    double denominator = 0.0;
    for (const auto& [i, rank] : hits) {
        numerator += ys_[i];
        denominator += 1.0;
    }
    if (denominator == 0.0) return 0.0;
    return numerator / denominator;
}

double DeepNetEstimator::predict(const AmbientPoint& x, Mode mode, bool query_gated) const {
    switch (mode) {
        case Mode::Literal: return predict_literal(x);
        case Mode::Interior: return predict_interior(x);
        case Mode::Feedback: return predict_feedback(x, query_gated);
    }
    throw std::logic_error("predict: unhandled mode");
}

LambdaSets DeepNetEstimator::lambda_sets(const AmbientPoint& x) const {
    LambdaSets result;
    result.lambda_x = active_cells_gated(x);

    std::set<std::size_t> sample_set;
    for (const auto& cell : result.lambda_x) {
        auto it = table_.cells.find(cell);
        if (it == table_.cells.end()) continue;
        sample_set.insert(it->second.samples.begin(), it->second.samples.end());
    }

    std::set<CellIndex> distinct_all, distinct_prime;
    for (std::size_t i : sample_set) {
        for (const auto& cell : table_.membership[i]) {
            result.lambda_xs.emplace_back(i, cell);
            distinct_all.insert(cell);
            if (std::binary_search(result.lambda_x.begin(), result.lambda_x.end(), cell)) {
                result.lambda_xs_prime.emplace_back(i, cell);
                distinct_prime.insert(cell);
            }
        }
    }
    result.distinct_cells_xs = distinct_all.size();
    result.distinct_cells_xs_prime = distinct_prime.size();
    return result;
}

nlohmann::json DeepNetEstimator::to_json() const {
    nlohmann::json j;
    j["atlas_ref"] = atlas_->to_json();
    j["n"] = table_.n;
    j["M"] = M_;
    j["m"] = ys_.size();
    j["ys"] = ys_;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [cell, stats] : table_.cells) {
        nlohmann::json c;
        c["j"] = cell.j;
        c["k"] = cell.k;
        c["T"] = stats.count;
        c["Sy"] = stats.y_sum;
        c["samples"] = stats.samples;
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    nlohmann::json extensions = nlohmann::json::object();
    for (const auto& [cube, idx] : assignment_) {
        if (atlas_->assignment.count(cube)) continue;
        std::ostringstream key;
        for (std::size_t i = 0; i < cube.size(); ++i) key << (i ? "," : "") << cube[i];
        extensions[key.str()] = idx;
    }
    j["assignment_extensions"] = std::move(extensions);
    return j;
}

DeepNetEstimator DeepNetEstimator::from_json(const nlohmann::json& j) {
    DeepNetEstimator est;
    est.atlas_ = std::make_shared<Atlas>(Atlas::from_json(j.at("atlas_ref")));
    est.assignment_ = est.atlas_->assignment;
    if (j.contains("assignment_extensions")) {
        for (const auto& [key, idx] : j.at("assignment_extensions").items()) {
            CubeIndex cube;
            std::istringstream is(key);
            std::string part;
            while (std::getline(is, part, ',')) cube.push_back(std::stoi(part));
            est.assignment_.emplace(std::move(cube), idx.get<int>());
        }
    }
    est.table_.n = j.at("n").get<int>();
    est.M_ = j.at("M").get<double>();
    est.ys_ = j.value("ys", std::vector<double>{});
    est.table_.membership.resize(est.ys_.size());
    for (const auto& c : j.at("cells")) {
        CellIndex cell{c.at("j").get<CubeIndex>(), c.at("k").get<std::vector<int>>()};
        CellStats stats;
        stats.count = c.at("T").get<long long>();
        stats.y_sum = c.at("Sy").get<double>();
        stats.samples = c.value("samples", std::vector<std::size_t>{});
        for (std::size_t i : stats.samples)
            if (i < est.table_.membership.size()) est.table_.membership[i].push_back(cell);
        auto chart_it = est.assignment_.find(cell.j);
        if (chart_it != est.assignment_.end()) est.sampled_cubes_.emplace(cell.j, chart_it->second);
        est.table_.cells.emplace(std::move(cell), std::move(stats));
    }
    for (auto& cells : est.table_.membership) std::sort(cells.begin(), cells.end());
    for (const auto& [cell, stats] : est.table_.cells) {
        est.table_.total_count += stats.count;
        est.table_.total_y_sum += stats.y_sum;
    }
    return est;
}

}  // namespace localnet
