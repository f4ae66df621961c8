#ifndef LOCALNET_ESTIMATOR_HPP
#define LOCALNET_ESTIMATOR_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "localnet/charts.hpp"

namespace localnet {

// Cell H_{k,j}: manifold points of ambient cube j whose chart image lies in
// chart-space cube k. Ordered lexicographically by (j, k).
struct CellIndex {
    CubeIndex j;         // ambient cube, components in 1..2q*
    std::vector<int> k;  // chart cell, components in 1..2n

    friend bool operator<(const CellIndex& a, const CellIndex& b) {
        if (a.j != b.j) return a.j < b.j;
        return a.k < b.k;
    }
    friend bool operator==(const CellIndex& a, const CellIndex& b) { return a.j == b.j && a.k == b.k; }
};

struct CellStats {
    long long count = 0;  // T_{k,j}
    double y_sum = 0.0;   // sum of y_i over samples in the cell, in sample order
    std::vector<std::size_t> samples;  // ascending sample indices
};

struct CellTable {
    int n = 1;
    std::map<CellIndex, CellStats> cells;
    std::vector<std::vector<CellIndex>> membership;  // sample index -> cells containing it (lex order)

    long long total_count = 0;   // sum of T over all cells (boundary samples counted per cell)
    double total_y_sum = 0.0;
};

// n = ceil(m^(1/(2s+d))), nudged by 1e-12 before the ceiling so that exact
// powers are not pushed up by floating-point overshoot.
int choose_n(std::size_t m, double s, int d);

struct LambdaSets {
    std::vector<CellIndex> lambda_x;  // cells whose cube contains x and whose indicator fires at x
    std::vector<std::pair<std::size_t, CellIndex>> lambda_xs;        // (sample, cell) pairs, sample-major
    std::vector<std::pair<std::size_t, CellIndex>> lambda_xs_prime;  // subset whose cell is in lambda_x
    std::size_t distinct_cells_xs = 0;        // secondary diagnostic: distinct cells among the pairs
    std::size_t distinct_cells_xs_prime = 0;

    std::size_t card_x() const { return lambda_x.size(); }
    std::size_t card_xs() const { return lambda_xs.size(); }
    std::size_t card_xs_prime() const { return lambda_xs_prime.size(); }
};

// Three-hidden-layer deep-net estimator over the atlas grid. Immutable after
// construction; prediction calls are safe to run concurrently.
class DeepNetEstimator {
public:
    enum class Mode { Literal, Interior, Feedback };

    // Populates the cell table by evaluating the gated indicators on every
    // sample; samples sitting on shared cube faces or cell boundaries
    // register in every touching cell. Cubes that the atlas table does not
    // cover are assigned by the covering rule with the sample as witness;
    // a sample no chart ball can cover is an error.
    DeepNetEstimator(std::shared_ptr<const Atlas> atlas, const SampleSet& samples, int n);

    double predict(const AmbientPoint& x, Mode mode, bool query_gated = true) const;
    double predict_literal(const AmbientPoint& x) const;
    double predict_interior(const AmbientPoint& x) const;
    double predict_feedback(const AmbientPoint& x, bool query_gated = true) const;

    LambdaSets lambda_sets(const AmbientPoint& x) const;

    // cells whose cube contains x (closed) and whose chart-cell indicator
    // fires at x
    std::vector<CellIndex> active_cells_gated(const AmbientPoint& x) const;
    // cells of any sampled cube whose indicator fires at x, cube gate ignored
    std::vector<CellIndex> active_cells_ungated(const AmbientPoint& x) const;

    const CellTable& table() const { return table_; }
    const Atlas& atlas() const { return *atlas_; }
    std::shared_ptr<const Atlas> atlas_ptr() const { return atlas_; }
    const std::map<CubeIndex, int>& assignment() const { return assignment_; }
    int n() const { return table_.n; }
    double bound_M() const { return M_; }
    const std::vector<double>& ys() const { return ys_; }

    nlohmann::json to_json() const;
    static DeepNetEstimator from_json(const nlohmann::json& j);

    static Mode mode_from_name(const std::string& name);
    static std::string mode_name(Mode mode);

private:
    DeepNetEstimator() = default;

    std::optional<int> chart_index_for(const CubeIndex& cube, const AmbientPoint& witness) const;

    std::shared_ptr<const Atlas> atlas_;
    std::map<CubeIndex, int> assignment_;  // atlas assignment plus build-time extensions
    std::map<CubeIndex, int> sampled_cubes_;  // cubes owning at least one table cell
    CellTable table_;
    double M_ = 1.0;
    std::vector<double> ys_;
};

DeepNetEstimator build_estimator(std::shared_ptr<const Atlas> atlas, const SampleSet& samples, int n);

}  // namespace localnet

#endif
