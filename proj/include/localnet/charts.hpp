#ifndef LOCALNET_CHARTS_HPP
#define LOCALNET_CHARTS_HPP

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "localnet/geometry.hpp"

namespace localnet {

// One output coordinate of a fitted chart net: sum_k a_k * sigma2(w_k.x + b_k)
struct SquareNetTerm {
    double a = 0.0;
    std::vector<double> w;
    double b = 0.0;
};

// Chart map from a geodesic ball B_G(center, delta) into [-1,1]^d. The
// analytic backend divides inverse-exponential coordinates by delta; the
// fitted backend is a square-rectifier network with exactly (D+2)(D+1)
// terms per output coordinate, trained against the analytic map.
class Chart {
public:
    enum class Backend { Analytic, FittedNet };

    static Chart analytic(std::shared_ptr<const Manifold> manifold, ParamPoint center_param, double delta);
    static Chart fitted(const Chart& analytic_teacher, std::vector<std::vector<SquareNetTerm>> net);

    struct MapResult {
        ChartPoint point;       // clamped to [-1,1]^d when out of domain
        bool in_domain = true;  // false iff analytic backend saw d_G(center,x) > delta
    };
    MapResult map(const AmbientPoint& x) const;

    Backend backend() const { return backend_; }
    const AmbientPoint& center() const { return center_; }
    const ParamPoint& center_param() const { return center_param_; }
    double delta() const { return delta_; }
    const Manifold& manifold() const { return *manifold_; }
    std::shared_ptr<const Manifold> manifold_ptr() const { return manifold_; }
    const std::vector<std::vector<SquareNetTerm>>& net() const { return net_; }

    double alpha_hat = 0.0;  // sampled distortion estimates, set by the atlas builder
    double beta_hat = 0.0;

    double distance_to_center(const AmbientPoint& x) const;

    nlohmann::json to_json() const;
    static Chart from_json(const nlohmann::json& j, std::shared_ptr<const Manifold> manifold);

private:
    Chart() = default;

    Backend backend_ = Backend::Analytic;
    std::shared_ptr<const Manifold> manifold_;
    AmbientPoint center_;
    ParamPoint center_param_;
    double delta_ = 1.0;
    std::vector<std::vector<SquareNetTerm>> net_;  // [d][terms]
};

using CubeIndex = std::vector<int>;  // multi-index j in {1..2q*}^D

struct DeltaPolicy {
    enum class Kind { Analytic, Fixed } kind = Kind::Analytic;
    double fixed_delta = 0.0;

    static DeltaPolicy analytic() { return {}; }
    static DeltaPolicy fixed(double delta) { return {Kind::Fixed, delta}; }
};

struct AtlasOptions {
    DeltaPolicy delta_policy;
    double safety = 1.1;                  // inflation on the sampled C0 estimate
    std::size_t c0_pairs = 4096;          // pairs for the C0 estimate
    std::size_t cover_samples = 8192;     // greedy cover candidate set size
    std::size_t assignment_samples = 200000;  // dense sample backing cube->chart assignment
    std::size_t distortion_pairs = 2000;  // pairs per chart for alpha/beta estimates
    std::size_t cover_iteration_cap = 4096;
    int densify_retries = 2;              // 2x candidate densification retries

    nlohmann::json to_json() const;
    static AtlasOptions from_json(const nlohmann::json& j);
};

// Finite atlas plus the grid data the estimator needs: embedding constant
// C0, grid resolution q*, and the sparse cube -> chart assignment over the
// cubes that meet the manifold.
class Atlas {
public:
    std::shared_ptr<const Manifold> manifold;
    std::vector<Chart> charts;
    double C0 = 1.0;
    int q_star = 1;
    std::map<CubeIndex, int> assignment;  // only cubes that met the dense sample
    double alpha = 0.0;  // min over charts of alpha_hat
    double beta = 0.0;   // max over charts of beta_hat
    std::uint64_t seed = 0;
    AtlasOptions options;

    // chart index for a cube from the table, or from the covering rule using
    // a manifold point known to lie in that cube (half-ball rule: smallest
    // chart index whose half-radius ball contains the witness)
    std::optional<int> chart_for_cube(const CubeIndex& j) const;
    std::optional<int> resolve_cube_chart(const CubeIndex& j, const AmbientPoint& witness) const;

    nlohmann::json to_json() const;
    static Atlas from_json(const nlohmann::json& j);
};

// C0 estimate: safety * max sampled d_G / chord (floored at 1), or the
// analytic constant when the manifold has one.
double estimate_embedding_constant(const Manifold& manifold, std::size_t n_pairs, std::uint64_t seed,
                                   double safety = 1.1);

// Raw max of d_G / chord over sampled pairs (no safety factor, no analytic
// shortcut); the sampled half of the C0 estimate.
double sampled_embedding_ratio(const Manifold& manifold, std::size_t n_pairs, std::uint64_t seed);

// Raw (pre-ceiling) grid resolution 2 C0 sqrt(D) / delta_min and its ceiling.
double grid_resolution_raw(double C0, int ambient_dim, double delta_min);
int select_grid_resolution(double C0, int ambient_dim, double delta_min);
int select_grid_resolution(const Atlas& atlas);

Atlas build_atlas(std::shared_ptr<const Manifold> manifold, const AtlasOptions& options, std::uint64_t seed);

// Assignment for one cube: nullopt iff the cube's dense sample is empty
// (cube misses the manifold as far as sampling can tell). Throws when the
// cube has sample points no chart ball can contain.
std::optional<int> assign_chart_to_cube(const Atlas& atlas, const CubeIndex& j);

struct DistortionEstimate {
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    std::size_t pairs_used = 0;
};

// min / max of ||Phi(x)-Phi(x')|| / d_G(x,x') over sampled in-ball pairs,
// including radial and near-tangential probe pairs so the sampled range
// brackets the true one tightly.
DistortionEstimate distortion_constants(const Chart& chart, std::size_t n_pairs, std::uint64_t seed);

struct ChartFitOptions {
    std::size_t train_points = 4096;
    std::size_t eval_points = 20000;
    int resample_cap = 40;
    double target_sup_error = 1e-3;
};

// Fit one scalar function of ambient points with exactly n_terms square-
// rectifier ridge terms: a fixed block of kink-free features spanning all
// quadratics on the cloud plus randomized in-domain kinks, solved by linear
// least squares, resampling the kinks until the sup target is met.
struct SquareNetFit {
    std::vector<SquareNetTerm> terms;
    double sup_error = 0.0;
    int resamples_used = 0;
};
SquareNetFit fit_square_net(const std::vector<AmbientPoint>& train_x, const std::vector<double>& train_y,
                            const std::vector<AmbientPoint>& eval_x, const std::vector<double>& eval_y,
                            int n_terms, std::uint64_t seed, int resample_cap, double target_sup_error);

// Fit a square-rectifier network chart against an analytic teacher by linear
// least squares over randomized ridge features, resampling features until
// the in-ball sup error target is met. Throws (reporting the achieved
// residual) when the cap is exhausted.
struct ChartFitReport {
    Chart chart;  // fitted backend
    double sup_error = 0.0;
    int resamples_used = 0;
};
ChartFitReport fit_chart_net(const Chart& analytic_teacher, std::uint64_t seed, const ChartFitOptions& options = {});

}  // namespace localnet

#endif
