#include "localnet/charts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "localnet/netcore.hpp"
#include "lstsq.hpp"

namespace localnet {

namespace {

constexpr std::uint64_t kStreamC0 = 0x4330ULL;
constexpr std::uint64_t kStreamCover = 0x636f76ULL;
constexpr std::uint64_t kStreamDistortion = 0x64697374ULL;
constexpr std::uint64_t kStreamAssign = 0x61736eULL;
constexpr std::uint64_t kStreamFitTrain = 0x66697454ULL;
constexpr std::uint64_t kStreamFitEval = 0x66697445ULL;
constexpr std::uint64_t kStreamFitFeat = 0x66697446ULL;

std::vector<double> random_unit_vector(Rng& rng, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double len = 0.0;
    do {
        for (auto& c : v) c = rng.normal();
        len = norm2(v);
    } while (len < 1e-12);
    for (auto& c : v) c /= len;
    return v;
}

// uniform point of the radius-`radius` log-space ball, pushed through exp
AmbientPoint sample_in_ball(const Manifold& manifold, const ParamPoint& center, double radius,
                            Rng& rng, int max_attempts = 64) {
    const int d = manifold.intrinsic_dim();
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<double> dir = random_unit_vector(rng, d);
        const double rho = radius * std::pow(rng.uniform01(), 1.0 / d);
        for (auto& c : dir) c *= rho;
        try {
            return manifold.exp_map(center, dir);
        } catch (const std::domain_error&) {
            continue;  // ball clipped by the parametrization domain (swiss roll edge)
        }
    }
    throw std::runtime_error("sample_in_ball: chart ball does not fit the parametrization domain");
}

}  // namespace

// ---------------------------------------------------------------------------
// Chart

Chart Chart::analytic(std::shared_ptr<const Manifold> manifold, ParamPoint center_param, double delta) {
    if (!manifold) throw std::invalid_argument("Chart::analytic: null manifold");
    if (!(delta > 0.0)) throw std::invalid_argument("Chart::analytic: delta must be positive");
    Chart c;
    c.backend_ = Backend::Analytic;
    c.manifold_ = std::move(manifold);
    c.center_param_ = std::move(center_param);
    c.center_ = c.manifold_->embed(c.center_param_);
    c.delta_ = delta;
    return c;
}

Chart Chart::fitted(const Chart& analytic_teacher, std::vector<std::vector<SquareNetTerm>> net) {
    if (analytic_teacher.backend_ != Backend::Analytic)
        throw std::invalid_argument("Chart::fitted: teacher must be analytic");
    Chart c = analytic_teacher;
    c.backend_ = Backend::FittedNet;
    c.net_ = std::move(net);
    if (static_cast<int>(c.net_.size()) != c.manifold_->intrinsic_dim())
        throw std::invalid_argument("Chart::fitted: one term list per output coordinate required");
    return c;
}

double Chart::distance_to_center(const AmbientPoint& x) const {
    return norm2(manifold_->log_map(center_param_, x));
}

Chart::MapResult Chart::map(const AmbientPoint& x) const {
    if (static_cast<int>(x.size()) != manifold_->ambient_dim())
        throw std::invalid_argument("Chart::map: ambient dimension mismatch");
    if (backend_ == Backend::FittedNet) {
        MapResult res;
        res.in_domain = true;
        res.point.resize(net_.size());
        for (std::size_t l = 0; l < net_.size(); ++l) {
            double acc = 0.0;
            for (const auto& term : net_[l]) acc += term.a * square_rectifier(dot(term.w, x) + term.b);
            res.point[l] = acc;
        }
        return res;
    }
    manifold_->require_on_manifold(x);
    std::vector<double> v = manifold_->log_map(center_param_, x);
    const double dist = norm2(v);
    MapResult res;
    res.in_domain = dist <= delta_;
    res.point.resize(v.size());
    for (std::size_t l = 0; l < v.size(); ++l) res.point[l] = std::clamp(v[l] / delta_, -1.0, 1.0);
    return res;
}

nlohmann::json Chart::to_json() const {
    nlohmann::json j;
    j["center"] = center_;
    j["center_param"] = center_param_;
    j["delta"] = delta_;
    j["backend"] = backend_ == Backend::Analytic ? "analytic" : "fitted-net";
    j["alpha"] = alpha_hat;
    j["beta"] = beta_hat;
    if (backend_ == Backend::FittedNet) {
        nlohmann::json coeffs = nlohmann::json::array();
        for (const auto& coord : net_) {
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& t : coord) terms.push_back({{"a", t.a}, {"w", t.w}, {"b", t.b}});
            coeffs.push_back(std::move(terms));
        }
        j["coeffs"] = std::move(coeffs);
    }
    return j;
}

Chart Chart::from_json(const nlohmann::json& j, std::shared_ptr<const Manifold> manifold) {
    Chart c = analytic(std::move(manifold), j.at("center_param").get<ParamPoint>(), j.at("delta").get<double>());
    c.alpha_hat = j.value("alpha", 0.0);
    c.beta_hat = j.value("beta", 0.0);
    if (j.at("backend").get<std::string>() == "fitted-net") {
        std::vector<std::vector<SquareNetTerm>> net;
        for (const auto& coord : j.at("coeffs")) {
            std::vector<SquareNetTerm> terms;
            for (const auto& t : coord)
                terms.push_back({t.at("a").get<double>(), t.at("w").get<std::vector<double>>(), t.at("b").get<double>()});
            net.push_back(std::move(terms));
        }
        c = fitted(c, std::move(net));
    }
    return c;
}

// ---------------------------------------------------------------------------
// embedding constant and grid resolution

double sampled_embedding_ratio(const Manifold& manifold, std::size_t n_pairs, std::uint64_t seed) {
    double max_ratio = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        Rng rng(hash64(seed, kStreamC0, i));
        const ParamPoint pa = manifold.sample_param(rng);
        const ParamPoint pb = manifold.sample_param(rng);
        const double chord = dist2(manifold.embed(pa), manifold.embed(pb));
        if (chord < 1e-14) continue;
        max_ratio = std::max(max_ratio, manifold.geodesic_params(pa, pb) / chord);
        ++used;
    }
    if (used == 0) throw std::runtime_error("sampled_embedding_ratio: all sampled pairs degenerate");
    return max_ratio;
}

double estimate_embedding_constant(const Manifold& manifold, std::size_t n_pairs, std::uint64_t seed,
                                   double safety) {
    if (n_pairs < 1000) throw std::invalid_argument("estimate_embedding_constant: need n_pairs >= 1000");
    if (!(safety >= 1.0)) throw std::invalid_argument("estimate_embedding_constant: safety must be >= 1");
    const double max_ratio = sampled_embedding_ratio(manifold, n_pairs, seed);
    if (auto analytic = manifold.analytic_embedding_constant()) {
        if (max_ratio > *analytic * (1.0 + 1e-9))
            throw std::runtime_error("estimate_embedding_constant: sampled ratio exceeds the analytic constant");
        return *analytic;
    }
    return std::max(1.0, safety * max_ratio);
}

double grid_resolution_raw(double C0, int ambient_dim, double delta_min) {
    if (!(C0 >= 1.0) || ambient_dim < 1 || !(delta_min > 0.0))
        throw std::invalid_argument("grid_resolution_raw: bad arguments");
    return 2.0 * C0 * std::sqrt(static_cast<double>(ambient_dim)) / delta_min;
}

int select_grid_resolution(double C0, int ambient_dim, double delta_min) {
    const double raw = grid_resolution_raw(C0, ambient_dim, delta_min);
    const int q = static_cast<int>(std::ceil(raw));
    return std::max(1, q);
}

int select_grid_resolution(const Atlas& atlas) {
    double delta_min = std::numeric_limits<double>::infinity();
    for (const auto& chart : atlas.charts) delta_min = std::min(delta_min, chart.delta());
    return select_grid_resolution(atlas.C0, atlas.manifold->ambient_dim(), delta_min);
}

// ---------------------------------------------------------------------------
// distortion

DistortionEstimate distortion_constants(const Chart& chart, std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 1000) throw std::invalid_argument("distortion_constants: need n_pairs >= 1000");
    const Manifold& manifold = chart.manifold();
    const ParamPoint& center = chart.center_param();
    const double delta = chart.delta() * (1.0 - 1e-12);
    const int d = manifold.intrinsic_dim();

    DistortionEstimate est;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;

    auto consume_pair = [&](const AmbientPoint& x1, const AmbientPoint& x2) {
        const double dg = manifold.geodesic_params(manifold.to_param(x1), manifold.to_param(x2));
        if (dg < 1e-12) return;  // degenerate pair
        const auto u1 = chart.map(x1);
        const auto u2 = chart.map(x2);
        const double du = dist2(u1.point, u2.point);
        if (du <= 1e-12 && dg >= 1e-6)
            throw std::runtime_error("distortion_constants: chart collapses a separated pair (not injective)");
        const double ratio = du / dg;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++est.pairs_used;
    };

    // random in-ball pairs
    for (std::size_t i = 0; i < n_pairs; ++i) {
        Rng rng(hash64(seed, kStreamDistortion, i));
        try {
            const AmbientPoint x1 = sample_in_ball(manifold, center, delta, rng);
            const AmbientPoint x2 = sample_in_ball(manifold, center, delta, rng);
            consume_pair(x1, x2);
        } catch (const std::runtime_error& e) {
            if (std::string(e.what()).find("not injective") != std::string::npos) throw;
            continue;
        }
    }

    // structured probes: radial pairs bracket the radial scale exactly,
    // near-tangential pairs at maximal radius approach the sup
    const std::size_t probes = 64;
    for (std::size_t i = 0; i < probes; ++i) {
        Rng rng(hash64(seed, kStreamDistortion, n_pairs + i));
        try {
            std::vector<double> dir = random_unit_vector(rng, d);
            const double rho1 = delta * rng.uniform01();
            const double rho2 = delta * rng.uniform01();
            std::vector<double> v1 = dir, v2 = dir;
            for (auto& c : v1) c *= rho1;
            for (auto& c : v2) c *= rho2;
            consume_pair(manifold.exp_map(center, v1), manifold.exp_map(center, v2));

            if (d >= 2) {
                std::vector<double> other = random_unit_vector(rng, d);
                const double proj = dot(other, dir);
                for (std::size_t k = 0; k < other.size(); ++k) other[k] -= proj * dir[k];
                const double len = norm2(other);
                if (len > 1e-9) {
                    for (auto& c : other) c /= len;
                    const double eps = 3e-5;
                    std::vector<double> w1(dir.size()), w2(dir.size());
                    for (std::size_t k = 0; k < dir.size(); ++k) {
                        w1[k] = delta * dir[k];
                        w2[k] = delta * (std::cos(eps) * dir[k] + std::sin(eps) * other[k]);
                    }
                    consume_pair(manifold.exp_map(center, w1), manifold.exp_map(center, w2));
                }
            }
        } catch (const std::domain_error&) {
            continue;
        } catch (const std::runtime_error& e) {
            if (std::string(e.what()).find("not injective") != std::string::npos) throw;
            continue;
        }
    }

    if (est.pairs_used == 0) throw std::runtime_error("distortion_constants: no usable pairs");
    est.alpha_hat = lo;
    est.beta_hat = hi;
    return est;
}

// ---------------------------------------------------------------------------
// atlas construction

nlohmann::json AtlasOptions::to_json() const {
    nlohmann::json j;
    j["delta_policy"] = delta_policy.kind == DeltaPolicy::Kind::Analytic
                            ? nlohmann::json("analytic")
                            : nlohmann::json({{"fixed", delta_policy.fixed_delta}});
    j["safety"] = safety;
    j["c0_pairs"] = c0_pairs;
    j["cover_samples"] = cover_samples;
    j["assignment_samples"] = assignment_samples;
    j["distortion_pairs"] = distortion_pairs;
    return j;
}

AtlasOptions AtlasOptions::from_json(const nlohmann::json& j) {
    AtlasOptions o;
    if (j.contains("delta_policy")) {
        const auto& p = j.at("delta_policy");
        if (p.is_string() && p.get<std::string>() == "analytic") o.delta_policy = DeltaPolicy::analytic();
        else if (p.is_object() && p.contains("fixed")) o.delta_policy = DeltaPolicy::fixed(p.at("fixed").get<double>());
        else if (p.is_number()) o.delta_policy = DeltaPolicy::fixed(p.get<double>());
        else throw std::invalid_argument("atlas options: bad delta_policy");
    }
    o.safety = j.value("safety", o.safety);
    o.c0_pairs = j.value("c0_pairs", o.c0_pairs);
    o.cover_samples = j.value("cover_samples", o.cover_samples);
    o.assignment_samples = j.value("assignment_samples", o.assignment_samples);
    o.distortion_pairs = j.value("distortion_pairs", o.distortion_pairs);
    return o;
}

Atlas build_atlas(std::shared_ptr<const Manifold> manifold, const AtlasOptions& options, std::uint64_t seed) {
    if (!manifold) throw std::invalid_argument("build_atlas: null manifold");
    const double delta = options.delta_policy.kind == DeltaPolicy::Kind::Analytic
                             ? manifold->default_chart_radius()
                             : options.delta_policy.fixed_delta;
    if (!(delta > 0.0)) throw std::invalid_argument("build_atlas: chart radius must be positive");

    Atlas atlas;
    atlas.manifold = manifold;
    atlas.seed = seed;
    atlas.options = options;
    atlas.C0 = estimate_embedding_constant(*manifold, options.c0_pairs, hash64(seed, kStreamC0), options.safety);

    // greedy farthest-point cover by half-radius balls over a dense candidate set
    std::vector<ParamPoint> candidates;
    std::size_t next_candidate = 0;
    auto extend_candidates = [&](std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(hash64(seed, kStreamCover, next_candidate++));
            candidates.push_back(manifold->sample_param(rng));
        }
    };
    extend_candidates(std::max<std::size_t>(options.cover_samples, 16));

    std::vector<std::size_t> center_idx;
    for (int round = 0; round <= options.densify_retries; ++round) {
        center_idx.clear();
        std::vector<double> min_dist(candidates.size(), std::numeric_limits<double>::infinity());
        center_idx.push_back(0);
        for (std::size_t it = 0; it < options.cover_iteration_cap; ++it) {
            const ParamPoint& latest = candidates[center_idx.back()];
            double worst = 0.0;
            std::size_t worst_idx = 0;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                min_dist[i] = std::min(min_dist[i], manifold->geodesic_params(candidates[i], latest));
                if (min_dist[i] > worst) {
                    worst = min_dist[i];
                    worst_idx = i;
                }
            }
            if (worst <= delta / 2.0) break;
            center_idx.push_back(worst_idx);
        }
        double worst = 0.0;
        for (double dmin : min_dist) worst = std::max(worst, dmin);
        if (worst <= delta / 2.0) break;
        if (round == options.densify_retries) {
            std::ostringstream msg;
            msg << "build_atlas: half-radius cover not achieved after " << center_idx.size()
                << " centers (worst gap " << worst << " vs " << delta / 2.0 << ")";
            throw std::runtime_error(msg.str());
        }
        extend_candidates(candidates.size());  // densify 2x and retry
    }

    for (std::size_t ci = 0; ci < center_idx.size(); ++ci) {
        Chart chart = Chart::analytic(manifold, candidates[center_idx[ci]], delta);
        const DistortionEstimate est =
            distortion_constants(chart, options.distortion_pairs, hash64(seed, kStreamDistortion, ci));
        chart.alpha_hat = est.alpha_hat;
        chart.beta_hat = est.beta_hat;
        atlas.charts.push_back(std::move(chart));
    }
    atlas.alpha = std::numeric_limits<double>::infinity();
    atlas.beta = 0.0;
    for (const auto& chart : atlas.charts) {
        atlas.alpha = std::min(atlas.alpha, chart.alpha_hat);
        atlas.beta = std::max(atlas.beta, chart.beta_hat);
    }

    atlas.q_star = select_grid_resolution(atlas.C0, manifold->ambient_dim(), delta);

    // dense sample -> sparse cube table -> smallest viable chart per cube
    std::map<CubeIndex, std::vector<AmbientPoint>> cube_points;
    for (std::size_t i = 0; i < options.assignment_samples; ++i) {
        Rng rng(hash64(seed, kStreamAssign, i));
        AmbientPoint x = manifold->embed(manifold->sample_param(rng));
        for (auto& j : cubes_containing(x, atlas.q_star)) cube_points[std::move(j)].push_back(x);
    }
    for (const auto& [cube, points] : cube_points) {
        int chosen = -1;
        int containment_only = -1;
        for (std::size_t ci = 0; ci < atlas.charts.size(); ++ci) {
            const Chart& chart = atlas.charts[ci];
            bool all_inside = true;
            bool half_witness = false;
            for (const auto& x : points) {
                const double dist = chart.distance_to_center(x);
                if (dist > chart.delta()) {
                    all_inside = false;
                    break;
                }
                if (dist <= chart.delta() / 2.0) half_witness = true;
            }
            if (!all_inside) continue;
            if (half_witness) {
                chosen = static_cast<int>(ci);
                break;
            }
            if (containment_only < 0) containment_only = static_cast<int>(ci);
        }
        if (chosen < 0) chosen = containment_only;
        if (chosen < 0) {
            std::ostringstream msg;
            msg << "build_atlas: no chart ball contains cube (";
            for (std::size_t k = 0; k < cube.size(); ++k) msg << (k ? "," : "") << cube[k];
            msg << ") with " << points.size() << " sampled points; delta/q* are inconsistent";
            throw std::runtime_error(msg.str());
        }
        atlas.assignment.emplace(cube, chosen);
    }
    return atlas;
}

std::optional<int> Atlas::chart_for_cube(const CubeIndex& j) const {
    auto it = assignment.find(j);
    if (it == assignment.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Atlas::resolve_cube_chart(const CubeIndex& j, const AmbientPoint& witness) const {
    if (auto hit = chart_for_cube(j)) return hit;
    // covering rule: the half-radius balls cover the manifold, and any chart
    // whose half ball reaches into the cube contains the whole cube section
    for (std::size_t ci = 0; ci < charts.size(); ++ci)
        if (charts[ci].distance_to_center(witness) <= charts[ci].delta() / 2.0) return static_cast<int>(ci);
    // witness sits in the fill gap of the cover sample: fall back to the
    // nearest center if it is still comfortably inside the ball (per-point
    // in-domain checks downstream catch any actual escape)
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < charts.size(); ++ci) {
        const double dist = charts[ci].distance_to_center(witness);
        if (dist < best_dist) {
            best_dist = dist;
            best = static_cast<int>(ci);
        }
    }
    if (best >= 0 && best_dist <= charts[static_cast<std::size_t>(best)].delta() * 0.75)
        return best;
    return std::nullopt;
}

std::optional<int> assign_chart_to_cube(const Atlas& atlas, const CubeIndex& j) {
    if (static_cast<int>(j.size()) != atlas.manifold->ambient_dim())
        throw std::invalid_argument("assign_chart_to_cube: index dimension mismatch");
    for (int c : j)
        if (c < 1 || c > 2 * atlas.q_star) throw std::invalid_argument("assign_chart_to_cube: index out of range");
    return atlas.chart_for_cube(j);
}

// ---------------------------------------------------------------------------
// serialization

namespace {
std::string cube_key(const CubeIndex& j) {
    std::ostringstream os;
    for (std::size_t k = 0; k < j.size(); ++k) os << (k ? "," : "") << j[k];
    return os.str();
}

CubeIndex parse_cube_key(const std::string& key) {
    CubeIndex j;
    std::istringstream is(key);
    std::string part;
    while (std::getline(is, part, ',')) j.push_back(std::stoi(part));
    return j;
}
}  // namespace

nlohmann::json Atlas::to_json() const {
    nlohmann::json j;
    j["manifold"] = manifold->to_json();
    nlohmann::json charts_json = nlohmann::json::array();
    for (const auto& chart : charts) charts_json.push_back(chart.to_json());
    j["charts"] = std::move(charts_json);
    j["C0"] = C0;
    j["q_star"] = q_star;
    nlohmann::json assign_json = nlohmann::json::object();
    for (const auto& [cube, idx] : assignment) assign_json[cube_key(cube)] = idx;
    j["assignment"] = std::move(assign_json);
    j["alpha"] = alpha;
    j["beta"] = beta;
    j["seed"] = seed;
    j["options"] = options.to_json();
    return j;
}

Atlas Atlas::from_json(const nlohmann::json& j) {
    Atlas atlas;
    atlas.manifold = std::make_shared<Manifold>(Manifold::from_json(j.at("manifold")));
    for (const auto& cj : j.at("charts")) atlas.charts.push_back(Chart::from_json(cj, atlas.manifold));
    atlas.C0 = j.at("C0").get<double>();
    atlas.q_star = j.at("q_star").get<int>();
    for (const auto& [key, idx] : j.at("assignment").items())
        atlas.assignment.emplace(parse_cube_key(key), idx.get<int>());
    atlas.alpha = j.value("alpha", 0.0);
    atlas.beta = j.value("beta", 0.0);
    atlas.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("options")) atlas.options = AtlasOptions::from_json(j.at("options"));
    return atlas;
}

// ---------------------------------------------------------------------------
// square-rectifier net fitting

SquareNetFit fit_square_net(const std::vector<AmbientPoint>& train_x, const std::vector<double>& train_y,
                            const std::vector<AmbientPoint>& eval_x, const std::vector<double>& eval_y,
                            int n_terms, std::uint64_t seed, int resample_cap, double target_sup_error) {
    if (train_x.empty() || train_x.size() != train_y.size() || eval_x.size() != eval_y.size())
        throw std::invalid_argument("fit_square_net: bad point sets");
    const int D = static_cast<int>(train_x.front().size());

    // kink-free block: sigma2(w.x+b) == (w.x+b)^2 on the cloud when b keeps
    // the argument positive, so pairs of shifted quadratics span constants,
    // linears, and all degree-2 monomials
    std::vector<std::vector<double>> directions;
    for (int a = 0; a < D; ++a) {
        std::vector<double> e(static_cast<std::size_t>(D), 0.0);
        e[static_cast<std::size_t>(a)] = 1.0;
        directions.push_back(e);
    }
    for (int a = 0; a < D; ++a)
        for (int b = a + 1; b < D; ++b) {
            std::vector<double> e(static_cast<std::size_t>(D), 0.0);
            e[static_cast<std::size_t>(a)] = 1.0;
            e[static_cast<std::size_t>(b)] = 1.0;
            directions.push_back(e);
        }

    std::vector<SquareNetTerm> fixed_terms;
    fixed_terms.push_back({0.0, std::vector<double>(static_cast<std::size_t>(D), 0.0), 1.0});  // constant
    for (const auto& w : directions) {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& x : train_x) lo = std::min(lo, dot(w, x));
        lo = std::min(lo, 0.0) - 1.0;  // margin keeps args positive a bit beyond the cloud
        fixed_terms.push_back({0.0, w, 1.0 - lo});
        fixed_terms.push_back({0.0, w, 2.5 - lo});
    }
    if (static_cast<int>(fixed_terms.size()) > n_terms)
        throw std::invalid_argument("fit_square_net: n_terms too small for the quadratic block");
    const int n_kinks = n_terms - static_cast<int>(fixed_terms.size());

    auto feature_value = [](const SquareNetTerm& t, const AmbientPoint& x) {
        return square_rectifier(dot(t.w, x) + t.b);
    };

    SquareNetFit best;
    best.sup_error = std::numeric_limits<double>::infinity();

    for (int round = 0; round <= resample_cap; ++round) {
        std::vector<SquareNetTerm> terms = fixed_terms;
        Rng rng(hash64(seed, kStreamFitFeat, static_cast<std::uint64_t>(round)));
        for (int k = 0; k < n_kinks; ++k) {
            SquareNetTerm t;
            t.w = random_unit_vector(rng, D);
            const auto& anchor = train_x[static_cast<std::size_t>(rng.uniform_index(train_x.size()))];
            t.b = -dot(t.w, anchor) + 1e-3 * rng.uniform(-1.0, 1.0);
            terms.push_back(std::move(t));
        }

        const std::size_t rows = train_x.size();
        const std::size_t cols = terms.size();
        std::vector<double> A(rows * cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t c = 0; c < cols; ++c) A[i * cols + c] = feature_value(terms[c], train_x[i]);
        std::vector<double> coeffs = detail::lstsq(std::move(A), train_y, rows, cols);
        for (std::size_t c = 0; c < cols; ++c) terms[c].a = coeffs[c];

        double sup = 0.0;
        for (std::size_t i = 0; i < eval_x.size(); ++i) {
            double acc = 0.0;
            for (const auto& t : terms) acc += t.a * feature_value(t, eval_x[i]);
            sup = std::max(sup, std::fabs(acc - eval_y[i]));
        }
        for (std::size_t i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (const auto& t : terms) acc += t.a * feature_value(t, train_x[i]);
            sup = std::max(sup, std::fabs(acc - train_y[i]));
        }

        if (sup < best.sup_error) {
            best.sup_error = sup;
            best.terms = terms;
            best.resamples_used = round;
        }
        if (best.sup_error <= target_sup_error) return best;
        if (n_kinks == 0) break;  // nothing to resample
    }

    if (best.sup_error > target_sup_error) {
        std::ostringstream msg;
        msg << "fit_square_net: sup error " << best.sup_error << " above target " << target_sup_error
            << " after " << resample_cap << " feature resamples";
        throw std::runtime_error(msg.str());
    }
    return best;
}

ChartFitReport fit_chart_net(const Chart& analytic_teacher, std::uint64_t seed, const ChartFitOptions& options) {
    if (analytic_teacher.backend() != Chart::Backend::Analytic)
        throw std::invalid_argument("fit_chart_net: teacher must be an analytic chart");
    const Manifold& manifold = analytic_teacher.manifold();
    const int D = manifold.ambient_dim();
    const int d = manifold.intrinsic_dim();
    const int terms = (D + 2) * (D + 1);

    const double radius = analytic_teacher.delta() * (1.0 - 1e-12);
    auto draw_points = [&](std::size_t count, std::uint64_t stream) {
        std::vector<AmbientPoint> pts;
        pts.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(hash64(seed, stream, i));
            pts.push_back(sample_in_ball(manifold, analytic_teacher.center_param(), radius, rng));
        }
        return pts;
    };
    const std::vector<AmbientPoint> train_x = draw_points(options.train_points, kStreamFitTrain);
    const std::vector<AmbientPoint> eval_x = draw_points(options.eval_points, kStreamFitEval);

    std::vector<std::vector<double>> train_targets(static_cast<std::size_t>(d)), eval_targets(static_cast<std::size_t>(d));
    for (const auto& x : train_x) {
        const auto u = analytic_teacher.map(x);
        for (int l = 0; l < d; ++l) train_targets[static_cast<std::size_t>(l)].push_back(u.point[static_cast<std::size_t>(l)]);
    }
    for (const auto& x : eval_x) {
        const auto u = analytic_teacher.map(x);
        for (int l = 0; l < d; ++l) eval_targets[static_cast<std::size_t>(l)].push_back(u.point[static_cast<std::size_t>(l)]);
    }

    ChartFitReport report{analytic_teacher, 0.0, 0};
    std::vector<std::vector<SquareNetTerm>> net;
    for (int l = 0; l < d; ++l) {
        SquareNetFit fit = fit_square_net(train_x, train_targets[static_cast<std::size_t>(l)], eval_x,
                                          eval_targets[static_cast<std::size_t>(l)], terms,
                                          hash64(seed, kStreamFitFeat, static_cast<std::uint64_t>(l) + 1000),
                                          options.resample_cap, options.target_sup_error);
        report.sup_error = std::max(report.sup_error, fit.sup_error);
        report.resamples_used = std::max(report.resamples_used, fit.resamples_used);
        net.push_back(std::move(fit.terms));
    }
    report.chart = Chart::fitted(analytic_teacher, std::move(net));
    return report;
}

}  // namespace localnet
