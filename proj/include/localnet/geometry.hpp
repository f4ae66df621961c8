#ifndef LOCALNET_GEOMETRY_HPP
#define LOCALNET_GEOMETRY_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "localnet/rng.hpp"

namespace localnet {

using AmbientPoint = std::vector<double>;  // length D, inside [-1,1]^D
using ChartPoint = std::vector<double>;    // length d, inside [-1,1]^d
using ParamPoint = std::vector<double>;    // intrinsic parametrization coordinates

double norm2(const std::vector<double>& v);
double dist2(const std::vector<double>& a, const std::vector<double>& b);
double dot(const std::vector<double>& a, const std::vector<double>& b);

enum class ManifoldKind { Circle, Sphere, Torus, SwissRoll, ProductEmbedding };

std::string manifold_kind_name(ManifoldKind kind);

// A d-dimensional manifold embedded in [-1,1]^D with closed-form geodesics,
// uniform sampling, and inverse-exponential (log) coordinates. Geodesics are
// analytic so the assumption validators and oracles stay exact; the
// estimator itself never consults them.
class Manifold {
public:
    static Manifold circle(double radius = 0.9);
    static Manifold sphere(double radius = 0.9);
    static Manifold flat_torus(double r1 = 0.6, double r2 = 0.6);
    // spiral (a t cos t, h, a t sin t), t in [t0,t1], |h| <= half_height; the
    // radial scale a is chosen so the image stays inside scale*[-1,1]^3
    static Manifold swiss_roll(double t0 = 4.71238898038468986, double t1 = 14.1371669411540695,
                               double half_height = 0.9, double scale = 0.9);
    // base manifold placed in a higher ambient dimension by zero-padding
    // followed by a fixed orthogonal map (identity when rotation_seed == 0)
    static Manifold product_embedding(Manifold base, int ambient_dim, std::uint64_t rotation_seed);

    ManifoldKind kind() const { return kind_; }
    int intrinsic_dim() const { return intrinsic_dim_; }
    int ambient_dim() const { return ambient_dim_; }

    AmbientPoint embed(const ParamPoint& theta) const;
    ParamPoint to_param(const AmbientPoint& x) const;
    bool on_manifold(const AmbientPoint& x, double tol = 1e-9) const;
    void require_on_manifold(const AmbientPoint& x, double tol = 1e-9) const;

    double geodesic(const AmbientPoint& a, const AmbientPoint& b) const;
    double geodesic_params(const ParamPoint& a, const ParamPoint& b) const;

    // intrinsic normal coordinates of x at the given center; the Euclidean
    // norm of the result equals the geodesic distance to the center
    std::vector<double> log_map(const ParamPoint& center, const AmbientPoint& x) const;
    // inverse of log_map along geodesics from the center
    AmbientPoint exp_map(const ParamPoint& center, const std::vector<double>& tangent) const;

    ParamPoint sample_param(Rng& rng) const;  // uniform w.r.t. the Riemannian volume

    double geodesic_diameter() const;
    double ambient_norm_bound() const;  // max Euclidean norm over the image
    std::optional<double> analytic_embedding_constant() const;  // C0 when known in closed form
    double default_chart_radius() const;
    // largest separation below which the 1/2 d_G <= chord <= 2 d_G comparison
    // is exercised by the property tests
    double comparability_radius() const;

    nlohmann::json to_json() const;
    static Manifold from_json(const nlohmann::json& j);

    const Manifold& base() const;  // product embedding only

private:
    Manifold() = default;

    AmbientPoint rotate(const std::vector<double>& padded) const;
    std::vector<double> unrotate(const AmbientPoint& x) const;

    // swiss roll arc-length helpers
    double roll_arclength(double t) const;
    double roll_param_from_arclength(double s) const;

    ManifoldKind kind_ = ManifoldKind::Circle;
    int intrinsic_dim_ = 1;
    int ambient_dim_ = 2;
    double radius_ = 0.9;            // circle / sphere
    double r1_ = 0.6, r2_ = 0.6;     // torus
    double t0_ = 0, t1_ = 0;         // swiss roll parameter range
    double half_height_ = 0.9;       // swiss roll height
    double roll_scale_ = 0.9;        // swiss roll radial scale a
    double s0_ = 0, s1_ = 0;         // swiss roll arc-length range
    std::shared_ptr<const Manifold> base_;          // product embedding
    std::uint64_t rotation_seed_ = 0;               // product embedding
    std::vector<std::vector<double>> rotation_;     // D x D orthogonal, empty = identity
};

// Closed-form regression targets with known smoothness data.
enum class TargetKind { Constant, Coordinate, Cosine, SignCoordinate };

struct TargetFunction {
    TargetKind kind = TargetKind::Coordinate;
    int axis = 0;            // ambient coordinate used by coordinate / cosine / sign
    double value = 0.0;      // constant level
    double frequency = 1.0;  // cosine
    double amplitude = 1.0;  // cosine
    double smoothness = 1.0;         // s in (0,1]
    double lipschitz_const = 1.0;    // c0
    double sup_bound = 1.0;          // closed-form bound on sup |f|

    double operator()(const AmbientPoint& x) const;

    static TargetFunction constant(double value);
    static TargetFunction coordinate(int axis, const Manifold& manifold);
    static TargetFunction cosine(int axis, double frequency, double amplitude, const Manifold& manifold);
    static TargetFunction sign_coordinate(int axis);  // discontinuous; fails Lipschitz validation

    nlohmann::json to_json() const;
    static TargetFunction from_json(const nlohmann::json& j, const Manifold& manifold);
};

enum class NoiseKind { None, Uniform, TruncatedGaussian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Uniform;
    double half_width = 0.2;  // uniform(+-a)
    double sigma = 0.1;       // truncated gaussian scale
    double bound() const;     // almost-sure bound on |eps|

    nlohmann::json to_json() const;
    static NoiseSpec from_json(const nlohmann::json& j);
};

// Input distribution: uniform on the manifold, or uniform contaminated with
// atoms placed bit-exactly on grid-cube faces (a deliberate violation of the
// continuity assumption on rho_X).
struct InputDistribution {
    enum class Kind { Uniform, BoundaryAtom } kind = Kind::Uniform;
    double p_atom = 0.0;
    int grid_q = 0;  // cube grid half-resolution the atoms snap to

    nlohmann::json to_json() const;
    static InputDistribution from_json(const nlohmann::json& j);
};

struct SampleSet {
    std::vector<AmbientPoint> points;
    std::vector<double> ys;
    double bound_M = 1.0;
    std::uint64_t seed = 0;
    nlohmann::json manifold_descriptor;

    std::size_t size() const { return points.size(); }
};

// Deterministic input sampler; each point is drawn from a stream derived
// from (seed, stream tag, point index), so boundary-atom mode with p_atom=0
// reproduces the uniform draw bit-for-bit.
std::vector<AmbientPoint> sample_inputs(const Manifold& manifold, std::size_t m,
                                        const InputDistribution& dist, std::uint64_t seed);

SampleSet draw_sample_set(const Manifold& manifold, const TargetFunction& target,
                          const NoiseSpec& noise, std::size_t m, std::uint64_t seed,
                          const InputDistribution& dist = {},
                          std::optional<double> bound_M = std::nullopt);

struct LipschitzReport {
    double max_ratio = 0.0;
    double declared_c0 = 0.0;
    std::size_t pairs = 0;
    bool pass = false;
};

// Max of |f(x)-f(x')| / d_G(x,x')^s over sampled pairs, compared against the
// declared c0 (with a 1e-9 relative allowance).
LipschitzReport validate_lipschitz(const TargetFunction& target, const Manifold& manifold,
                                   std::size_t n_pairs, std::uint64_t seed);

// Faces of the width-1/q grid that the boundary-atom sampler can hit with a
// representable coordinate; empty when the manifold embedding is rotated.
struct BoundaryFace {
    int axis = 0;
    double value = 0.0;  // exact float sitting on both adjacent closed cubes
};
std::vector<BoundaryFace> boundary_faces(const Manifold& manifold, int grid_q);

}  // namespace localnet

#endif
