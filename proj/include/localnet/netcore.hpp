#ifndef LOCALNET_NETCORE_HPP
#define LOCALNET_NETCORE_HPP

#include <cstdint>
#include <vector>

namespace localnet {

// Heaviside step with closed-boundary semantics: heaviside(0) == 1. This is
// what makes the two-layer localization net the indicator of the *closed*
// grid cube.
double heaviside(double t);

// square rectifier: max(t, 0)^2
double square_rectifier(double t);

// Axis-aligned grid of (2*resolution)^dim cube centers inside (-1,1)^dim.
struct GridSpec {
    int resolution = 1;  // q (ambient grid) or n (chart grid)
    int dim = 1;
};

// Center coordinate of the j-th cube along one axis, j in 1..2q. Evaluated
// as (2j - 2q - 1) / (2q) with a single division so the value is identical
// wherever it is recomputed.
double grid_center_coord(int q, int j);

// All centers in lexicographic multi-index order.
std::vector<std::vector<double>> grid_centers(const GridSpec& spec);

// Two-hidden-layer Heaviside network that realizes the indicator of the
// closed cube of width 1/q centered at the grid point with multi-index j.
struct LocalizationNet {
    int r = 1;               // input dimension
    int q = 1;               // grid half-resolution
    std::vector<int> index;  // multi-index j, each component in 1..2q

    void validate() const;
};

// Evaluate the net by the literal nested-Heaviside formula:
//   sigma0( sum_l sigma0(1/(2q) + xi_l - zeta_l)
//         + sum_l sigma0(1/(2q) - xi_l + zeta_l) - 2r + 1/2 )
// Both differences are taken as (xi_l - zeta_l) first so that the evaluation
// agrees with cube_indicator_oracle bit-for-bit, boundaries included.
double localization_eval(const LocalizationNet& net, const std::vector<double>& xi);

// Inner pre-activation sum (before the outer Heaviside); equals 1/2 on the
// cube and <= -1/2 off it.
double localization_inner_sum(const LocalizationNet& net, const std::vector<double>& xi);

// Reference membership test: per-coordinate |xi_l - zeta_l| <= 1/(2q), on
// the same coordinate differences the network uses.
int cube_indicator_oracle(int r, int q, const std::vector<int>& index, const std::vector<double>& xi);

// Indices j (1..2q) of the closed width-1/q cubes containing coordinate c
// along one axis: one cube in the generic case, two when c sits on a shared
// face, none outside [-1,1] (up to the closed outer faces).
std::vector<int> axis_cubes_containing(double c, int q);

// Cartesian product of axis_cubes_containing over all coordinates.
std::vector<std::vector<int>> cubes_containing(const std::vector<double>& point, int q);

class Atlas;

// N_{3,k,j}(x) = N_{1,d,n,t_k}(N_{2,j}(x)): the chart-cell indicator
// evaluated through the literal Heaviside formula on cube j's chart image.
// Out-of-domain chart evaluations cannot fire. Throws when cube j carries
// no chart assignment.
double composite_cell_eval(const Atlas& atlas, const std::vector<int>& cube,
                           const std::vector<int>& cell, int n, const std::vector<double>& x);

// Sample-side gated form N_{1,D,q*,zeta_j}(x) * N_{3,k,j}(x), i.e. the
// indicator of the cell H_{k,j}.
double gated_composite_cell_eval(const Atlas& atlas, const std::vector<int>& cube,
                                 const std::vector<int>& cell, int n, const std::vector<double>& x);

}  // namespace localnet

#endif
