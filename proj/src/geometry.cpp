#include "localnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "localnet/netcore.hpp"

namespace localnet {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

// stream tags for per-call RNG derivation
constexpr std::uint64_t kStreamPoint = 0x706f696e74ULL;
constexpr std::uint64_t kStreamAtom = 0x61746f6dULL;
constexpr std::uint64_t kStreamNoise = 0x6e6f697365ULL;
constexpr std::uint64_t kStreamPair = 0x70616972ULL;
constexpr std::uint64_t kStreamRotation = 0x726f74ULL;

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

// great-circle distance from raw ambient coordinates (scale-invariant form)
double sphere_arc(const std::vector<double>& a, const std::vector<double>& b, double radius) {
    const std::vector<double> cross = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                                       a[0] * b[1] - a[1] * b[0]};
    return radius * std::atan2(norm2(cross), dot(a, b));
}

}  // namespace

double norm2(const std::vector<double>& v) {
    double acc = 0.0;
    for (double c : v) acc += c * c;
    return std::sqrt(acc);
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dist2: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::string manifold_kind_name(ManifoldKind kind) {
    switch (kind) {
        case ManifoldKind::Circle: return "circle";
        case ManifoldKind::Sphere: return "sphere";
        case ManifoldKind::Torus: return "torus";
        case ManifoldKind::SwissRoll: return "swiss-roll";
        case ManifoldKind::ProductEmbedding: return "product-embedding";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// factories

Manifold Manifold::circle(double radius) {
    if (!(radius > 0.0 && radius <= 1.0)) throw std::invalid_argument("circle: radius must be in (0,1]");
    Manifold m;
    m.kind_ = ManifoldKind::Circle;
    m.intrinsic_dim_ = 1;
    m.ambient_dim_ = 2;
    m.radius_ = radius;
    return m;
}

Manifold Manifold::sphere(double radius) {
    if (!(radius > 0.0 && radius <= 1.0)) throw std::invalid_argument("sphere: radius must be in (0,1]");
    Manifold m;
    m.kind_ = ManifoldKind::Sphere;
    m.intrinsic_dim_ = 2;
    m.ambient_dim_ = 3;
    m.radius_ = radius;
    return m;
}

Manifold Manifold::flat_torus(double r1, double r2) {
    if (!(r1 > 0.0 && r1 <= 1.0 && r2 > 0.0 && r2 <= 1.0))
        throw std::invalid_argument("flat_torus: radii must be in (0,1]");
    Manifold m;
    m.kind_ = ManifoldKind::Torus;
    m.intrinsic_dim_ = 2;
    m.ambient_dim_ = 4;
    m.r1_ = r1;
    m.r2_ = r2;
    return m;
}

Manifold Manifold::swiss_roll(double t0, double t1, double half_height, double scale) {
    if (!(t1 > t0 && t0 > 0.0)) throw std::invalid_argument("swiss_roll: need t1 > t0 > 0");
    if (!(half_height > 0.0 && half_height <= 1.0 && scale > 0.0 && scale <= 1.0))
        throw std::invalid_argument("swiss_roll: height and scale must be in (0,1]");
    Manifold m;
    m.kind_ = ManifoldKind::SwissRoll;
    m.intrinsic_dim_ = 2;
    m.ambient_dim_ = 3;
    m.t0_ = t0;
    m.t1_ = t1;
    m.half_height_ = half_height;
    m.roll_scale_ = scale / t1;  // radial scale a, so max radius == scale
    m.s0_ = m.roll_arclength(t0);
    m.s1_ = m.roll_arclength(t1);
    return m;
}

Manifold Manifold::product_embedding(Manifold base, int ambient_dim, std::uint64_t rotation_seed) {
    if (base.kind_ == ManifoldKind::ProductEmbedding)
        throw std::invalid_argument("product_embedding: base must not itself be a product embedding");
    if (ambient_dim < base.ambient_dim_)
        throw std::invalid_argument("product_embedding: ambient_dim must be >= base ambient dim");
    Manifold m;
    m.kind_ = ManifoldKind::ProductEmbedding;
    m.intrinsic_dim_ = base.intrinsic_dim_;
    m.ambient_dim_ = ambient_dim;
    m.rotation_seed_ = rotation_seed;
    m.base_ = std::make_shared<Manifold>(std::move(base));
    if (rotation_seed != 0) {
        // Haar-ish orthogonal map: modified Gram-Schmidt of a Gaussian matrix
        // with positive diagonal signs, fully determined by the seed.
        const int D = ambient_dim;
        Rng rng(hash64(rotation_seed, kStreamRotation));
        std::vector<std::vector<double>> cols(static_cast<std::size_t>(D), std::vector<double>(static_cast<std::size_t>(D)));
        for (auto& col : cols)
            for (auto& v : col) v = rng.normal();
        for (int k = 0; k < D; ++k) {
            auto& col = cols[static_cast<std::size_t>(k)];
            for (int prev = 0; prev < k; ++prev) {
                const auto& p = cols[static_cast<std::size_t>(prev)];
                const double proj = dot(col, p);
                for (int i = 0; i < D; ++i) col[static_cast<std::size_t>(i)] -= proj * p[static_cast<std::size_t>(i)];
            }
            const double len = norm2(col);
            if (len < 1e-12) throw std::runtime_error("product_embedding: degenerate rotation draw");
            const double sign = col[static_cast<std::size_t>(k)] >= 0.0 ? 1.0 : -1.0;
            for (auto& v : col) v /= sign * len;
        }
        // store row-major Q with columns as the orthonormal basis
        m.rotation_.assign(static_cast<std::size_t>(D), std::vector<double>(static_cast<std::size_t>(D)));
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) m.rotation_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    return m;
}

const Manifold& Manifold::base() const {
    if (!base_) throw std::logic_error("base(): not a product embedding");
    return *base_;
}

// ---------------------------------------------------------------------------
// swiss roll arc length

double Manifold::roll_arclength(double t) const {
    // integral of a*sqrt(1+u^2) du from 0 to t
    return roll_scale_ * 0.5 * (t * std::sqrt(1.0 + t * t) + std::asinh(t));
}

double Manifold::roll_param_from_arclength(double s) const {
    double lo = t0_, hi = t1_;
    if (s <= s0_) return t0_;
    if (s >= s1_) return t1_;
    double t = lo + (hi - lo) * (s - s0_) / (s1_ - s0_);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = roll_arclength(t) - s;
        if (f > 0.0) hi = t; else lo = t;
        const double deriv = roll_scale_ * std::sqrt(1.0 + t * t);
        double next = t - f / deriv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - t) < 1e-15 * std::max(1.0, std::fabs(t))) return next;
        t = next;
    }
    return t;
}

// ---------------------------------------------------------------------------
// embedding and inverse

AmbientPoint Manifold::rotate(const std::vector<double>& padded) const {
    if (rotation_.empty()) return padded;
    AmbientPoint out(static_cast<std::size_t>(ambient_dim_), 0.0);
    for (int i = 0; i < ambient_dim_; ++i) out[static_cast<std::size_t>(i)] = dot(rotation_[static_cast<std::size_t>(i)], padded);
    return out;
}

std::vector<double> Manifold::unrotate(const AmbientPoint& x) const {
    if (rotation_.empty()) return x;
    std::vector<double> out(static_cast<std::size_t>(ambient_dim_), 0.0);
    for (int j = 0; j < ambient_dim_; ++j) {
        double acc = 0.0;
        for (int i = 0; i < ambient_dim_; ++i) acc += rotation_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

AmbientPoint Manifold::embed(const ParamPoint& theta) const {
    if (static_cast<int>(theta.size()) != intrinsic_dim_)
        throw std::invalid_argument("embed: parameter dimension mismatch");
    for (double c : theta)
        if (!std::isfinite(c)) throw std::domain_error("embed: non-finite parameter");
    switch (kind_) {
        case ManifoldKind::Circle:
            return {radius_ * std::cos(theta[0]), radius_ * std::sin(theta[0])};
        case ManifoldKind::Sphere: {
            const double u = theta[0], v = theta[1];
            if (u < -1e-12 || u > kPi + 1e-12) throw std::domain_error("embed: polar angle outside [0,pi]");
            return {radius_ * std::sin(u) * std::cos(v), radius_ * std::sin(u) * std::sin(v), radius_ * std::cos(u)};
        }
        case ManifoldKind::Torus:
            return {r1_ * std::cos(theta[0]), r1_ * std::sin(theta[0]), r2_ * std::cos(theta[1]), r2_ * std::sin(theta[1])};
        case ManifoldKind::SwissRoll: {
            const double t = theta[0], h = theta[1];
            if (t < t0_ - 1e-9 || t > t1_ + 1e-9) throw std::domain_error("embed: spiral parameter out of range");
            if (std::fabs(h) > half_height_ + 1e-9) throw std::domain_error("embed: height out of range");
            return {roll_scale_ * t * std::cos(t), h, roll_scale_ * t * std::sin(t)};
        }
        case ManifoldKind::ProductEmbedding: {
            AmbientPoint inner = base_->embed(theta);
            inner.resize(static_cast<std::size_t>(ambient_dim_), 0.0);
            return rotate(inner);
        }
    }
    throw std::logic_error("embed: unhandled kind");
}

ParamPoint Manifold::to_param(const AmbientPoint& x) const {
    if (static_cast<int>(x.size()) != ambient_dim_)
        throw std::invalid_argument("to_param: ambient dimension mismatch");
    switch (kind_) {
        case ManifoldKind::Circle:
            return {std::atan2(x[1], x[0])};
        case ManifoldKind::Sphere: {
            const double z = std::clamp(x[2] / radius_, -1.0, 1.0);
            return {std::acos(z), std::atan2(x[1], x[0])};
        }
        case ManifoldKind::Torus:
            return {std::atan2(x[1], x[0]), std::atan2(x[3], x[2])};
        case ManifoldKind::SwissRoll: {
            const double rho = std::hypot(x[0], x[2]);
            const double t = rho / roll_scale_;
            return {t, x[1]};
        }
        case ManifoldKind::ProductEmbedding: {
            std::vector<double> inner = unrotate(x);
            inner.resize(static_cast<std::size_t>(base_->ambient_dim_));
            return base_->to_param(inner);
        }
    }
    throw std::logic_error("to_param: unhandled kind");
}

bool Manifold::on_manifold(const AmbientPoint& x, double tol) const {
    if (static_cast<int>(x.size()) != ambient_dim_) return false;
    for (double c : x)
        if (!std::isfinite(c)) return false;
    try {
        const ParamPoint p = to_param(x);
        const AmbientPoint y = embed(p);
        return dist2(x, y) <= tol;
    } catch (const std::exception&) {
        return false;
    }
}

void Manifold::require_on_manifold(const AmbientPoint& x, double tol) const {
    if (!on_manifold(x, tol)) throw std::domain_error("point is not on the manifold");
}

// ---------------------------------------------------------------------------
// geodesics

double Manifold::geodesic_params(const ParamPoint& a, const ParamPoint& b) const {
    switch (kind_) {
        case ManifoldKind::Circle:
            return radius_ * std::fabs(wrap_angle(a[0] - b[0]));
        case ManifoldKind::Sphere: {
            const AmbientPoint pa = embed(a), pb = embed(b);
            return sphere_arc(pa, pb, radius_);
        }
        case ManifoldKind::Torus: {
            const double d1 = r1_ * wrap_angle(a[0] - b[0]);
            const double d2 = r2_ * wrap_angle(a[1] - b[1]);
            return std::hypot(d1, d2);
        }
        case ManifoldKind::SwissRoll:
            return std::hypot(roll_arclength(a[0]) - roll_arclength(b[0]), a[1] - b[1]);
        case ManifoldKind::ProductEmbedding:
            return base_->geodesic_params(a, b);
    }
    throw std::logic_error("geodesic_params: unhandled kind");
}

double Manifold::geodesic(const AmbientPoint& a, const AmbientPoint& b) const {
    require_on_manifold(a);
    require_on_manifold(b);
    return geodesic_params(to_param(a), to_param(b));
}

// ---------------------------------------------------------------------------
// log / exp maps

namespace {
// deterministic orthonormal tangent frame at unit vector c on the 2-sphere
void sphere_frame(const std::vector<double>& c, std::vector<double>& e1, std::vector<double>& e2) {
    int axis = 0;
    for (int k = 1; k < 3; ++k)
        if (std::fabs(c[static_cast<std::size_t>(k)]) < std::fabs(c[static_cast<std::size_t>(axis)])) axis = k;
    e1.assign(3, 0.0);
    e1[static_cast<std::size_t>(axis)] = 1.0;
    const double proj = dot(e1, c);
    for (int k = 0; k < 3; ++k) e1[static_cast<std::size_t>(k)] -= proj * c[static_cast<std::size_t>(k)];
    const double len = norm2(e1);
    for (auto& v : e1) v /= len;
    e2 = {c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2], c[0] * e1[1] - c[1] * e1[0]};
}
}  // namespace

std::vector<double> Manifold::log_map(const ParamPoint& center, const AmbientPoint& x) const {
    switch (kind_) {
        case ManifoldKind::Circle: {
            const double theta = std::atan2(x[1], x[0]);
            return {radius_ * wrap_angle(theta - center[0])};
        }
        case ManifoldKind::Sphere: {
            const AmbientPoint p = embed(center);
            std::vector<double> chat = {p[0] / radius_, p[1] / radius_, p[2] / radius_};
            std::vector<double> xhat = {x[0] / radius_, x[1] / radius_, x[2] / radius_};
            std::vector<double> cross = {chat[1] * xhat[2] - chat[2] * xhat[1], chat[2] * xhat[0] - chat[0] * xhat[2],
                                         chat[0] * xhat[1] - chat[1] * xhat[0]};
            const double gamma = std::atan2(norm2(cross), dot(chat, xhat));
            std::vector<double> w = xhat;
            const double proj = dot(xhat, chat);
            for (int k = 0; k < 3; ++k) w[static_cast<std::size_t>(k)] -= proj * chat[static_cast<std::size_t>(k)];
            const double wlen = norm2(w);
            std::vector<double> e1, e2;
            sphere_frame(chat, e1, e2);
            if (wlen < 1e-14) return {radius_ * gamma, 0.0};  // center or antipode
            const double scale = radius_ * gamma / wlen;
            return {scale * dot(w, e1), scale * dot(w, e2)};
        }
        case ManifoldKind::Torus: {
            const double t1 = std::atan2(x[1], x[0]);
            const double t2 = std::atan2(x[3], x[2]);
            return {r1_ * wrap_angle(t1 - center[0]), r2_ * wrap_angle(t2 - center[1])};
        }
        case ManifoldKind::SwissRoll: {
            const ParamPoint p = to_param(x);
            return {roll_arclength(p[0]) - roll_arclength(center[0]), p[1] - center[1]};
        }
        case ManifoldKind::ProductEmbedding: {
            std::vector<double> inner = unrotate(x);
            inner.resize(static_cast<std::size_t>(base_->ambient_dim_));
            return base_->log_map(center, inner);
        }
    }
    throw std::logic_error("log_map: unhandled kind");
}

AmbientPoint Manifold::exp_map(const ParamPoint& center, const std::vector<double>& tangent) const {
    if (static_cast<int>(tangent.size()) != intrinsic_dim_)
        throw std::invalid_argument("exp_map: tangent dimension mismatch");
    switch (kind_) {
        case ManifoldKind::Circle:
            return embed({center[0] + tangent[0] / radius_});
        case ManifoldKind::Sphere: {
            const AmbientPoint p = embed(center);
            std::vector<double> chat = {p[0] / radius_, p[1] / radius_, p[2] / radius_};
            std::vector<double> e1, e2;
            sphere_frame(chat, e1, e2);
            const double vlen = std::hypot(tangent[0], tangent[1]);
            if (vlen == 0.0) return p;
            const double ang = vlen / radius_;
            AmbientPoint out(3);
            for (int k = 0; k < 3; ++k) {
                const double dir = (tangent[0] * e1[static_cast<std::size_t>(k)] + tangent[1] * e2[static_cast<std::size_t>(k)]) / vlen;
                out[static_cast<std::size_t>(k)] = radius_ * (std::cos(ang) * chat[static_cast<std::size_t>(k)] + std::sin(ang) * dir);
            }
            return out;
        }
        case ManifoldKind::Torus:
            return embed({center[0] + tangent[0] / r1_, center[1] + tangent[1] / r2_});
        case ManifoldKind::SwissRoll: {
            const double s = roll_arclength(center[0]) + tangent[0];
            if (s < s0_ - 1e-12 || s > s1_ + 1e-12) throw std::domain_error("exp_map: leaves the spiral strip");
            const double h = center[1] + tangent[1];
            if (std::fabs(h) > half_height_ + 1e-12) throw std::domain_error("exp_map: leaves the height strip");
            return embed({roll_param_from_arclength(s), std::clamp(h, -half_height_, half_height_)});
        }
        case ManifoldKind::ProductEmbedding: {
            AmbientPoint inner = base_->exp_map(center, tangent);
            inner.resize(static_cast<std::size_t>(ambient_dim_), 0.0);
            return rotate(inner);
        }
    }
    throw std::logic_error("exp_map: unhandled kind");
}

// ---------------------------------------------------------------------------
// sampling, bounds, metadata

ParamPoint Manifold::sample_param(Rng& rng) const {
    switch (kind_) {
        case ManifoldKind::Circle:
            return {rng.uniform(0.0, kTwoPi)};
        case ManifoldKind::Sphere: {
            const double z = rng.uniform(-1.0, 1.0);
            const double v = rng.uniform(0.0, kTwoPi);
            return {std::acos(std::clamp(z, -1.0, 1.0)), v};
        }
        case ManifoldKind::Torus:
            return {rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi)};
        case ManifoldKind::SwissRoll: {
            const double s = rng.uniform(s0_, s1_);
            const double h = rng.uniform(-half_height_, half_height_);
            return {roll_param_from_arclength(s), h};
        }
        case ManifoldKind::ProductEmbedding:
            return base_->sample_param(rng);
    }
    throw std::logic_error("sample_param: unhandled kind");
}

double Manifold::geodesic_diameter() const {
    switch (kind_) {
        case ManifoldKind::Circle: return kPi * radius_;
        case ManifoldKind::Sphere: return kPi * radius_;
        case ManifoldKind::Torus: return std::hypot(kPi * r1_, kPi * r2_);
        case ManifoldKind::SwissRoll: return std::hypot(s1_ - s0_, 2.0 * half_height_);
        case ManifoldKind::ProductEmbedding: return base_->geodesic_diameter();
    }
    throw std::logic_error("geodesic_diameter: unhandled kind");
}

std::optional<double> Manifold::analytic_embedding_constant() const {
    switch (kind_) {
        case ManifoldKind::Circle:
        case ManifoldKind::Sphere:
        case ManifoldKind::Torus:
            // d_G/chord = (theta/2)/sin(theta/2) maximized at antipodes
            return kPi / 2.0;
        case ManifoldKind::SwissRoll:
            return std::nullopt;  // windings approach in ambient space; estimate by sampling
        case ManifoldKind::ProductEmbedding:
            return base_->analytic_embedding_constant();
    }
    return std::nullopt;
}

double Manifold::default_chart_radius() const {
    switch (kind_) {
        case ManifoldKind::Circle: return kPi * radius_ / 2.0;
        case ManifoldKind::Sphere: return kPi * radius_ / 2.0;
        case ManifoldKind::Torus: return kPi * std::min(r1_, r2_) / 2.0;
        case ManifoldKind::SwissRoll: return 0.25 * std::min(s1_ - s0_, 2.0 * half_height_);
        case ManifoldKind::ProductEmbedding: return base_->default_chart_radius();
    }
    throw std::logic_error("default_chart_radius: unhandled kind");
}

double Manifold::comparability_radius() const {
    switch (kind_) {
        case ManifoldKind::Circle:
        case ManifoldKind::Sphere:
        case ManifoldKind::Torus:
            return geodesic_diameter();  // chord/geodesic >= 2/pi globally
        case ManifoldKind::SwissRoll: {
            // stay below the curvature scale and the inter-winding gap
            const double kappa_max = (t0_ * t0_ + 2.0) / (roll_scale_ * std::pow(1.0 + t0_ * t0_, 1.5));
            return 0.5 * std::min(1.0 / kappa_max, kTwoPi * roll_scale_);
        }
        case ManifoldKind::ProductEmbedding:
            return base_->comparability_radius();
    }
    throw std::logic_error("comparability_radius: unhandled kind");
}

double Manifold::ambient_norm_bound() const {
    switch (kind_) {
        case ManifoldKind::Circle: return radius_;
        case ManifoldKind::Sphere: return radius_;
        case ManifoldKind::Torus: return std::hypot(r1_, r2_);
        case ManifoldKind::SwissRoll: return std::hypot(roll_scale_ * t1_, half_height_);
        case ManifoldKind::ProductEmbedding: return base_->ambient_norm_bound();
    }
    throw std::logic_error("ambient_norm_bound: unhandled kind");
}

nlohmann::json Manifold::to_json() const {
    nlohmann::json j;
    j["kind"] = manifold_kind_name(kind_);
    switch (kind_) {
        case ManifoldKind::Circle:
        case ManifoldKind::Sphere:
            j["radius"] = radius_;
            break;
        case ManifoldKind::Torus:
            j["r1"] = r1_;
            j["r2"] = r2_;
            break;
        case ManifoldKind::SwissRoll:
            j["t0"] = t0_;
            j["t1"] = t1_;
            j["half_height"] = half_height_;
            j["scale"] = roll_scale_ * t1_;
            break;
        case ManifoldKind::ProductEmbedding:
            j["base"] = base_->to_json();
            j["ambient_dim"] = ambient_dim_;
            j["rotation_seed"] = rotation_seed_;
            break;
    }
    return j;
}

Manifold Manifold::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "circle") return circle(j.value("radius", 0.9));
    if (kind == "sphere") return sphere(j.value("radius", 0.9));
    if (kind == "torus") return flat_torus(j.value("r1", 0.6), j.value("r2", 0.6));
    if (kind == "swiss-roll")
        return swiss_roll(j.value("t0", 4.71238898038468986), j.value("t1", 14.1371669411540695),
                          j.value("half_height", 0.9), j.value("scale", 0.9));
    if (kind == "product-embedding") {
        Manifold base = j.contains("base") ? from_json(j.at("base")) : circle(j.value("radius", 0.9));
        return product_embedding(std::move(base), j.at("ambient_dim").get<int>(),
                                 j.value("rotation_seed", std::uint64_t{0}));
    }
    throw std::invalid_argument("Manifold::from_json: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// targets

double TargetFunction::operator()(const AmbientPoint& x) const {
    switch (kind) {
        case TargetKind::Constant: return value;
        case TargetKind::Coordinate: return x.at(static_cast<std::size_t>(axis));
        case TargetKind::Cosine: return amplitude * std::cos(frequency * x.at(static_cast<std::size_t>(axis)));
        case TargetKind::SignCoordinate: return x.at(static_cast<std::size_t>(axis)) >= 0.0 ? 1.0 : -1.0;
    }
    throw std::logic_error("TargetFunction: unhandled kind");
}

TargetFunction TargetFunction::constant(double value) {
    TargetFunction f;
    f.kind = TargetKind::Constant;
    f.value = value;
    f.smoothness = 1.0;
    f.lipschitz_const = 0.0;
    f.sup_bound = std::fabs(value);
    return f;
}

TargetFunction TargetFunction::coordinate(int axis, const Manifold& manifold) {
    if (axis < 0 || axis >= manifold.ambient_dim()) throw std::invalid_argument("coordinate target: axis out of range");
    TargetFunction f;
    f.kind = TargetKind::Coordinate;
    f.axis = axis;
    f.smoothness = 1.0;
    f.lipschitz_const = 1.0;  // |x_a - x'_a| <= ||x-x'|| <= d_G
    f.sup_bound = manifold.ambient_norm_bound();
    return f;
}

TargetFunction TargetFunction::cosine(int axis, double frequency, double amplitude, const Manifold& manifold) {
    if (axis < 0 || axis >= manifold.ambient_dim()) throw std::invalid_argument("cosine target: axis out of range");
    TargetFunction f;
    f.kind = TargetKind::Cosine;
    f.axis = axis;
    f.frequency = frequency;
    f.amplitude = amplitude;
    f.smoothness = 1.0;
    f.lipschitz_const = std::fabs(frequency * amplitude);
    f.sup_bound = std::fabs(amplitude);
    return f;
}

TargetFunction TargetFunction::sign_coordinate(int axis) {
    TargetFunction f;
    f.kind = TargetKind::SignCoordinate;
    f.axis = axis;
    f.smoothness = 1.0;
    f.lipschitz_const = 1.0;  // deliberately wrong: the jump breaks it
    f.sup_bound = 1.0;
    return f;
}

nlohmann::json TargetFunction::to_json() const {
    nlohmann::json j;
    switch (kind) {
        case TargetKind::Constant: j["kind"] = "constant"; j["value"] = value; break;
        case TargetKind::Coordinate: j["kind"] = "coordinate"; j["axis"] = axis; break;
        case TargetKind::Cosine:
            j["kind"] = "cosine";
            j["axis"] = axis;
            j["frequency"] = frequency;
            j["amplitude"] = amplitude;
            break;
        case TargetKind::SignCoordinate: j["kind"] = "sign"; j["axis"] = axis; break;
    }
    j["s"] = smoothness;
    j["c0"] = lipschitz_const;
    return j;
}

TargetFunction TargetFunction::from_json(const nlohmann::json& j, const Manifold& manifold) {
    const std::string kind = j.at("kind").get<std::string>();
    TargetFunction f;
    if (kind == "constant") f = constant(j.value("value", 0.0));
    else if (kind == "coordinate") f = coordinate(j.value("axis", 0), manifold);
    else if (kind == "cosine")
        f = cosine(j.value("axis", 0), j.value("frequency", 1.0), j.value("amplitude", 1.0), manifold);
    else if (kind == "sign") f = sign_coordinate(j.value("axis", 0));
    else throw std::invalid_argument("TargetFunction::from_json: unknown kind '" + kind + "'");
    if (j.contains("s")) {
        const double s = j.at("s").get<double>();
        if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("target: s must lie in (0,1]");
        if (s != f.smoothness && !j.contains("c0")) {
            // |f(x)-f(x')| <= c0 d^1 = c0 d^s d^{1-s} <= c0 diam^{1-s} d^s
            f.lipschitz_const *= std::pow(manifold.geodesic_diameter(), 1.0 - s);
        }
        f.smoothness = s;
    }
    if (j.contains("c0")) f.lipschitz_const = j.at("c0").get<double>();
    return f;
}

// ---------------------------------------------------------------------------
// noise

double NoiseSpec::bound() const {
    switch (kind) {
        case NoiseKind::None: return 0.0;
        case NoiseKind::Uniform: return half_width;
        case NoiseKind::TruncatedGaussian: return 4.0 * sigma;  // default truncation radius
    }
    return 0.0;
}

nlohmann::json NoiseSpec::to_json() const {
    nlohmann::json j;
    switch (kind) {
        case NoiseKind::None: j["kind"] = "none"; break;
        case NoiseKind::Uniform: j["kind"] = "uniform"; j["half_width"] = half_width; break;
        case NoiseKind::TruncatedGaussian: j["kind"] = "truncated-gaussian"; j["sigma"] = sigma; break;
    }
    return j;
}

NoiseSpec NoiseSpec::from_json(const nlohmann::json& j) {
    NoiseSpec n;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") n.kind = NoiseKind::None;
    else if (kind == "uniform") {
        n.kind = NoiseKind::Uniform;
        n.half_width = j.value("half_width", 0.2);
        if (!(n.half_width >= 0.0)) throw std::invalid_argument("noise: half_width must be >= 0");
    } else if (kind == "truncated-gaussian") {
        n.kind = NoiseKind::TruncatedGaussian;
        n.sigma = j.value("sigma", 0.1);
        if (!(n.sigma > 0.0)) throw std::invalid_argument("noise: sigma must be > 0");
    } else {
        throw std::invalid_argument("NoiseSpec::from_json: unknown kind '" + kind + "'");
    }
    return n;
}

nlohmann::json InputDistribution::to_json() const {
    nlohmann::json j;
    if (kind == Kind::Uniform) {
        j["kind"] = "uniform";
    } else {
        j["kind"] = "boundary-atom";
        j["p_atom"] = p_atom;
        j["grid_q"] = grid_q;
    }
    return j;
}

InputDistribution InputDistribution::from_json(const nlohmann::json& j) {
    InputDistribution d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") {
        d.kind = Kind::Uniform;
    } else if (kind == "boundary-atom") {
        d.kind = Kind::BoundaryAtom;
        d.p_atom = j.value("p_atom", 0.0);
        d.grid_q = j.value("grid_q", 0);
        if (!(d.p_atom >= 0.0 && d.p_atom <= 1.0)) throw std::invalid_argument("distribution: p_atom must be in [0,1]");
    } else {
        throw std::invalid_argument("InputDistribution::from_json: unknown kind '" + kind + "'");
    }
    return d;
}

// ---------------------------------------------------------------------------
// boundary-atom machinery

std::vector<BoundaryFace> boundary_faces(const Manifold& manifold, int grid_q) {
    std::vector<BoundaryFace> faces;
    if (grid_q < 1) return faces;
    if (manifold.kind() == ManifoldKind::ProductEmbedding) return faces;  // rotated/padded coordinates miss faces

    // axes whose coordinate can be pinned to an exact value while staying on
    // the manifold, together with the largest usable |value|
    std::vector<std::pair<int, double>> free_axes;
    switch (manifold.kind()) {
        case ManifoldKind::Circle: {
            const double r = manifold.ambient_norm_bound();
            free_axes = {{0, r}, {1, r}};
            break;
        }
        case ManifoldKind::Sphere: {
            const double r = manifold.ambient_norm_bound();
            free_axes = {{0, r}, {1, r}, {2, r}};
            break;
        }
        case ManifoldKind::Torus: {
            nlohmann::json desc = manifold.to_json();
            const double r1 = desc.at("r1").get<double>();
            const double r2 = desc.at("r2").get<double>();
            free_axes = {{0, r1}, {1, r1}, {2, r2}, {3, r2}};
            break;
        }
        case ManifoldKind::SwissRoll: {
            nlohmann::json desc = manifold.to_json();
            free_axes = {{1, desc.at("half_height").get<double>()}};
            break;
        }
        case ManifoldKind::ProductEmbedding:
            break;
    }

    for (const auto& [axis, bound] : free_axes) {
        for (int plane = 1; plane < 2 * grid_q; ++plane) {
            // interior face between cubes `plane` and `plane+1`
            const double nominal = static_cast<double>(plane - grid_q) / static_cast<double>(grid_q);
            if (!(std::fabs(nominal) < bound * 0.999)) continue;
            const double half_width = 1.0 / (2.0 * grid_q);
            const double from_low = grid_center_coord(grid_q, plane) + half_width;
            const double from_high = grid_center_coord(grid_q, plane + 1) - half_width;
            double candidates[] = {nominal,
                                   from_low,
                                   from_high,
                                   std::nextafter(nominal, 2.0),
                                   std::nextafter(nominal, -2.0)};
            for (double v : candidates) {
                if (axis_cubes_containing(v, grid_q).size() >= 2) {
                    faces.push_back({axis, v});
                    break;
                }
            }
        }
    }
    return faces;
}

namespace {

AmbientPoint make_atom_point(const Manifold& manifold, const BoundaryFace& face, Rng& rng) {
    switch (manifold.kind()) {
        case ManifoldKind::Circle: {
            const double r = manifold.ambient_norm_bound();
            const double other = std::sqrt(std::max(0.0, r * r - face.value * face.value));
            const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            AmbientPoint x(2);
            x[static_cast<std::size_t>(face.axis)] = face.value;
            x[static_cast<std::size_t>(1 - face.axis)] = sign * other;
            return x;
        }
        case ManifoldKind::Sphere: {
            const double r = manifold.ambient_norm_bound();
            const double rho = std::sqrt(std::max(0.0, r * r - face.value * face.value));
            const double psi = rng.uniform(0.0, kTwoPi);
            AmbientPoint x(3);
            x[static_cast<std::size_t>(face.axis)] = face.value;
            const int o1 = face.axis == 0 ? 1 : 0;
            const int o2 = face.axis == 2 ? 1 : 2;
            x[static_cast<std::size_t>(o1)] = rho * std::cos(psi);
            x[static_cast<std::size_t>(o2)] = rho * std::sin(psi);
            return x;
        }
        case ManifoldKind::Torus: {
            nlohmann::json desc = manifold.to_json();
            const double r1 = desc.at("r1").get<double>();
            const double r2 = desc.at("r2").get<double>();
            AmbientPoint x(4);
            const bool first_pair = face.axis < 2;
            const double rp = first_pair ? r1 : r2;
            const int partner = first_pair ? (1 - face.axis) : (5 - face.axis);
            const double other = std::sqrt(std::max(0.0, rp * rp - face.value * face.value));
            const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            x[static_cast<std::size_t>(face.axis)] = face.value;
            x[static_cast<std::size_t>(partner)] = sign * other;
            const double psi = rng.uniform(0.0, kTwoPi);
            const double rq = first_pair ? r2 : r1;
            const int f1 = first_pair ? 2 : 0;
            const int f2 = first_pair ? 3 : 1;
            x[static_cast<std::size_t>(f1)] = rq * std::cos(psi);
            x[static_cast<std::size_t>(f2)] = rq * std::sin(psi);
            return x;
        }
        case ManifoldKind::SwissRoll: {
            // pin the height coordinate; draw the spiral parameter uniformly in arc length
            ParamPoint p = manifold.sample_param(rng);
            AmbientPoint x = manifold.embed({p[0], 0.0});
            x[1] = face.value;
            return x;
        }
        case ManifoldKind::ProductEmbedding:
            break;
    }
    throw std::invalid_argument("boundary atoms are not available for this manifold");
}

}  // namespace

std::vector<AmbientPoint> sample_inputs(const Manifold& manifold, std::size_t m,
                                        const InputDistribution& dist, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("sample_inputs: m must be >= 1");

    std::vector<BoundaryFace> faces;
    if (dist.kind == InputDistribution::Kind::BoundaryAtom) {
        if (dist.grid_q < 1)
            throw std::invalid_argument("sample_inputs: boundary-atom mode needs a grid resolution");
        faces = boundary_faces(manifold, dist.grid_q);
        if (faces.empty() && dist.p_atom > 0.0)
            throw std::invalid_argument(
                "sample_inputs: boundary-atom mode needs an axis-aligned embedding with representable faces");
    }

    std::vector<AmbientPoint> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        bool atom = false;
        if (dist.kind == InputDistribution::Kind::BoundaryAtom && dist.p_atom > 0.0) {
            Rng decide(hash64(seed, kStreamAtom, i));
            if (decide.bernoulli(dist.p_atom)) {
                const auto& face = faces[static_cast<std::size_t>(decide.uniform_index(faces.size()))];
                out.push_back(make_atom_point(manifold, face, decide));
                atom = true;
            }
        }
        if (!atom) {
            Rng rng(hash64(seed, kStreamPoint, i));
            out.push_back(manifold.embed(manifold.sample_param(rng)));
        }
    }
    return out;
}

SampleSet draw_sample_set(const Manifold& manifold, const TargetFunction& target,
                          const NoiseSpec& noise, std::size_t m, std::uint64_t seed,
                          const InputDistribution& dist, std::optional<double> bound_M) {
    if (m < 1) throw std::invalid_argument("draw_sample_set: m must be >= 1");

    const double M = bound_M.value_or(target.sup_bound + noise.bound());
    const double margin = M - target.sup_bound;
    // one-ulp slack: M often arrives as fl(sup + bound), which may round below
    const double tolerance = 1e-12 * std::max(1.0, std::fabs(M));
    switch (noise.kind) {
        case NoiseKind::None:
            if (margin < -tolerance) throw std::invalid_argument("draw_sample_set: M is below sup |f|");
            break;
        case NoiseKind::Uniform:
            if (noise.half_width > margin + tolerance)
                throw std::invalid_argument("draw_sample_set: uniform noise bound exceeds M - sup|f|");
            break;
        case NoiseKind::TruncatedGaussian:
            if (!(margin > tolerance))
                throw std::invalid_argument("draw_sample_set: no truncation margin left under M");
            break;
    }

    SampleSet set;
    set.points = sample_inputs(manifold, m, dist, seed);
    set.ys.reserve(m);
    set.bound_M = M;
    set.seed = seed;
    set.manifold_descriptor = manifold.to_json();
    for (std::size_t i = 0; i < m; ++i) {
        double eps = 0.0;
        if (noise.kind == NoiseKind::Uniform && noise.half_width > 0.0) {
            Rng rng(hash64(seed, kStreamNoise, i));
            eps = std::clamp(rng.uniform(-noise.half_width, noise.half_width), -margin, margin);
        } else if (noise.kind == NoiseKind::TruncatedGaussian) {
            Rng rng(hash64(seed, kStreamNoise, i));
            eps = rng.truncated_normal(noise.sigma, margin);
        }
        const double y = target(set.points[i]) + eps;
        if (!(std::fabs(y) <= M + 1e-12))
            throw std::runtime_error("draw_sample_set: |y| exceeded the declared bound M");
        set.ys.push_back(y);
    }
    return set;
}

LipschitzReport validate_lipschitz(const TargetFunction& target, const Manifold& manifold,
                                   std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw std::invalid_argument("validate_lipschitz: n_pairs must be >= 1");
    LipschitzReport report;
    report.declared_c0 = target.lipschitz_const;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        Rng rng(hash64(seed, kStreamPair, i));
        const ParamPoint pa = manifold.sample_param(rng);
        const ParamPoint pb = manifold.sample_param(rng);
        const double d = manifold.geodesic_params(pa, pb);
        if (d < 1e-15) continue;
        const AmbientPoint xa = manifold.embed(pa);
        const AmbientPoint xb = manifold.embed(pb);
        const double ratio = std::fabs(target(xa) - target(xb)) / std::pow(d, target.smoothness);
        report.max_ratio = std::max(report.max_ratio, ratio);
        ++report.pairs;
    }
    report.pass = report.max_ratio <= target.lipschitz_const * (1.0 + 1e-9);
    return report;
}

}  // namespace localnet
