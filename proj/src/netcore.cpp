#include "localnet/netcore.hpp"

#include <cmath>
#include <stdexcept>

#include "localnet/charts.hpp"

namespace localnet {

double heaviside(double t) {
    if (std::isnan(t)) throw std::invalid_argument("heaviside: NaN input");
    return t >= 0.0 ? 1.0 : 0.0;
}

double square_rectifier(double t) {
    if (std::isnan(t)) throw std::invalid_argument("square_rectifier: NaN input");
    const double p = t > 0.0 ? t : 0.0;
    return p * p;
}

double grid_center_coord(int q, int j) {
    return static_cast<double>(2 * j - 2 * q - 1) / static_cast<double>(2 * q);
}

std::vector<std::vector<double>> grid_centers(const GridSpec& spec) {
    if (spec.resolution < 1 || spec.dim < 1)
        throw std::invalid_argument("grid_centers: resolution and dim must be positive");
    const int q = spec.resolution;
    const int r = spec.dim;
    const std::size_t side = static_cast<std::size_t>(2 * q);
    std::size_t total = 1;
    for (int l = 0; l < r; ++l) total *= side;

    std::vector<std::vector<double>> centers;
    centers.reserve(total);
    std::vector<int> index(static_cast<std::size_t>(r), 1);
    for (std::size_t count = 0; count < total; ++count) {
        std::vector<double> center(static_cast<std::size_t>(r));
        for (int l = 0; l < r; ++l) center[static_cast<std::size_t>(l)] = grid_center_coord(q, index[static_cast<std::size_t>(l)]);
        centers.push_back(std::move(center));
        // lexicographic increment, last axis fastest
        for (int l = r - 1; l >= 0; --l) {
            if (++index[static_cast<std::size_t>(l)] <= 2 * q) break;
            index[static_cast<std::size_t>(l)] = 1;
        }
    }
    return centers;
}

void LocalizationNet::validate() const {
    if (r < 1 || q < 1) throw std::invalid_argument("LocalizationNet: r and q must be positive");
    if (static_cast<int>(index.size()) != r) throw std::invalid_argument("LocalizationNet: index size mismatch");
    for (int j : index)
        if (j < 1 || j > 2 * q) throw std::invalid_argument("LocalizationNet: multi-index out of range");
}

double localization_inner_sum(const LocalizationNet& net, const std::vector<double>& xi) {
    if (net.r < 1 || net.q < 1) throw std::invalid_argument("LocalizationNet: r and q must be positive");
    if (static_cast<int>(net.index.size()) != net.r || static_cast<int>(xi.size()) != net.r)
        throw std::invalid_argument("localization_eval: dimension mismatch");
    const double half_width = 1.0 / (2.0 * net.q);
    double acc = 0.0;
    for (int l = 0; l < net.r; ++l) {
        const int j = net.index[static_cast<std::size_t>(l)];
        if (j < 1 || j > 2 * net.q) throw std::invalid_argument("localization_eval: multi-index out of range");
        const double diff = xi[static_cast<std::size_t>(l)] - grid_center_coord(net.q, j);
        acc += heaviside(half_width + diff);
        acc += heaviside(half_width - diff);
    }
    return acc - 2.0 * net.r + 0.5;
}

double localization_eval(const LocalizationNet& net, const std::vector<double>& xi) {
    return heaviside(localization_inner_sum(net, xi));
}

int cube_indicator_oracle(int r, int q, const std::vector<int>& index, const std::vector<double>& xi) {
    if (r < 1 || q < 1) throw std::invalid_argument("cube_indicator_oracle: r and q must be positive");
    if (static_cast<int>(index.size()) != r || static_cast<int>(xi.size()) != r)
        throw std::invalid_argument("cube_indicator_oracle: dimension mismatch");
    const double half_width = 1.0 / (2.0 * q);
    for (int l = 0; l < r; ++l) {
        const double diff = xi[static_cast<std::size_t>(l)] - grid_center_coord(q, index[static_cast<std::size_t>(l)]);
        if (std::isnan(diff)) throw std::invalid_argument("cube_indicator_oracle: NaN input");
        if (!(std::fabs(diff) <= half_width)) return 0;
    }
    return 1;
}

std::vector<int> axis_cubes_containing(double c, int q) {
    const double half_width = 1.0 / (2.0 * q);
    // candidate indices around floor(q*(c+1)), then filter with the same
    // closed-cube comparison the indicator networks use
    const double scaled = static_cast<double>(q) * (c + 1.0);
    const int base = static_cast<int>(std::floor(scaled));
    std::vector<int> out;
    for (int j = base; j <= base + 2; ++j) {
        if (j < 1 || j > 2 * q) continue;
        const double diff = c - grid_center_coord(q, j);
        if (std::fabs(diff) <= half_width) out.push_back(j);
    }
    // floor can land one too high on exact faces; sweep one below as well
    if (base - 1 >= 1 && base - 1 <= 2 * q) {
        const double diff = c - grid_center_coord(q, base - 1);
        if (std::fabs(diff) <= half_width) out.insert(out.begin(), base - 1);
    }
    return out;
}

double composite_cell_eval(const Atlas& atlas, const std::vector<int>& cube,
                           const std::vector<int>& cell, int n, const std::vector<double>& x) {
    const auto chart_idx = atlas.chart_for_cube(cube);
    if (!chart_idx) throw std::invalid_argument("composite_cell_eval: cube has no assigned chart");
    const Chart& chart = atlas.charts[static_cast<std::size_t>(*chart_idx)];
    const auto mapped = chart.map(x);
    if (!mapped.in_domain) return 0.0;
    LocalizationNet cell_net{static_cast<int>(cell.size()), n, cell};
    return localization_eval(cell_net, mapped.point);
}

double gated_composite_cell_eval(const Atlas& atlas, const std::vector<int>& cube,
                                 const std::vector<int>& cell, int n, const std::vector<double>& x) {
    LocalizationNet gate{static_cast<int>(cube.size()), atlas.q_star, cube};
    if (localization_eval(gate, x) == 0.0) return 0.0;
    return composite_cell_eval(atlas, cube, cell, n, x);
}

std::vector<std::vector<int>> cubes_containing(const std::vector<double>& point, int q) {
    if (point.empty()) return {};
    std::vector<std::vector<int>> axis_lists;
    axis_lists.reserve(point.size());
    for (double c : point) {
        auto cubes = axis_cubes_containing(c, q);
        if (cubes.empty()) return {};
        axis_lists.push_back(std::move(cubes));
    }
    std::vector<std::vector<int>> result;
    std::vector<std::size_t> pick(point.size(), 0);
    for (;;) {
        std::vector<int> index(point.size());
        for (std::size_t l = 0; l < point.size(); ++l) index[l] = axis_lists[l][pick[l]];
        result.push_back(std::move(index));
        // odometer increment, last axis fastest; stop after full wrap
        std::size_t axis = point.size();
        for (;;) {
            if (axis == 0) return result;
            --axis;
            if (++pick[axis] < axis_lists[axis].size()) break;
            pick[axis] = 0;
        }
    }
}

}  // namespace localnet
