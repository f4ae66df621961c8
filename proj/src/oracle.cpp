#include "localnet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "localnet/netcore.hpp"

namespace localnet {

namespace {
constexpr std::uint64_t kStreamBinomial = 0x6c31ULL;
constexpr std::uint64_t kStreamDecompDesign = 0x6c3264ULL;
constexpr std::uint64_t kStreamDecompQuery = 0x6c3271ULL;
constexpr std::uint64_t kStreamDecompNoise = 0x6c326eULL;

double sample_std_error(double sum, double sum_sq, std::size_t n) {
    if (n < 2) return 0.0;
    const double mean = sum / static_cast<double>(n);
    double var = (sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
    if (var < 0.0) var = 0.0;
    return std::sqrt(var / static_cast<double>(n));
}
}  // namespace

nlohmann::json McReport::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["estimate"] = estimate;
    j["bound_or_target"] = bound_or_target;
    j["trials"] = trials;
    j["std_error"] = std_error;
    j["pass"] = pass;
    return j;
}

std::vector<CellIndex> cell_membership(const Atlas& atlas, int n, const AmbientPoint& x,
                                       const std::map<CubeIndex, int>* assignment_overlay) {
    if (n < 1) throw std::invalid_argument("cell_membership: n must be >= 1");
    if (static_cast<int>(x.size()) != atlas.manifold->ambient_dim())
        throw std::invalid_argument("cell_membership: point dimension mismatch");
    const int q = atlas.q_star;
    const double cube_half = 1.0 / (2.0 * q);
    const double cell_half = 1.0 / (2.0 * n);
    const std::map<CubeIndex, int>& table = assignment_overlay ? *assignment_overlay : atlas.assignment;

    std::vector<CellIndex> result;
    for (const auto& [cube, chart_idx] : table) {
        bool inside = true;
        for (std::size_t l = 0; l < cube.size(); ++l) {
            const double diff = x[l] - grid_center_coord(q, cube[l]);
            if (!(std::fabs(diff) <= cube_half)) {
                inside = false;
                break;
            }
        }
        if (!inside) continue;
        const Chart& chart = atlas.charts[static_cast<std::size_t>(chart_idx)];
        const auto mapped = chart.map(x);
        if (!mapped.in_domain) continue;
        const int d = static_cast<int>(mapped.point.size());
        // scan the full chart grid per axis
        std::vector<std::vector<int>> axis_hits(static_cast<std::size_t>(d));
        bool any_empty = false;
        for (int l = 0; l < d; ++l) {
            for (int k = 1; k <= 2 * n; ++k) {
                const double diff = mapped.point[static_cast<std::size_t>(l)] - grid_center_coord(n, k);
                if (std::fabs(diff) <= cell_half) axis_hits[static_cast<std::size_t>(l)].push_back(k);
            }
            if (axis_hits[static_cast<std::size_t>(l)].empty()) any_empty = true;
        }
        if (any_empty) continue;
        std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
        for (;;) {
            std::vector<int> k(static_cast<std::size_t>(d));
            for (int l = 0; l < d; ++l) k[static_cast<std::size_t>(l)] = axis_hits[static_cast<std::size_t>(l)][pick[static_cast<std::size_t>(l)]];
            result.push_back({cube, std::move(k)});
            std::size_t axis = static_cast<std::size_t>(d);
            bool done = false;
            for (;;) {
                if (axis == 0) {
                    done = true;
                    break;
                }
                --axis;
                if (++pick[axis] < axis_hits[axis].size()) break;
                pick[axis] = 0;
            }
            if (done) break;
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

double partition_local_average(const Atlas& atlas, int n, const std::vector<AmbientPoint>& sample_points,
                               const std::vector<double>& sample_ys, const AmbientPoint& x,
                               const std::map<CubeIndex, int>* assignment_overlay) {
    if (sample_points.size() != sample_ys.size())
        throw std::invalid_argument("partition_local_average: points/ys size mismatch");
    const std::vector<CellIndex> query_cells = cell_membership(atlas, n, x, assignment_overlay);

    const int q = atlas.q_star;
    const double cube_half = 1.0 / (2.0 * q);
    const double cell_half = 1.0 / (2.0 * n);

    double numerator = 0.0;
    long long denominator = 0;
    for (const auto& cell : query_cells) {
        double cell_sum = 0.0;
        long long cell_count = 0;
        const int chart_idx = assignment_overlay ? assignment_overlay->at(cell.j) : atlas.assignment.at(cell.j);
        const Chart& chart = atlas.charts[static_cast<std::size_t>(chart_idx)];
        for (std::size_t i = 0; i < sample_points.size(); ++i) {
            const AmbientPoint& p = sample_points[i];
            bool inside = true;
            for (std::size_t l = 0; l < cell.j.size(); ++l) {
                const double diff = p[l] - grid_center_coord(q, cell.j[l]);
                if (!(std::fabs(diff) <= cube_half)) {
                    inside = false;
                    break;
                }
            }
            if (!inside) continue;
            const auto mapped = chart.map(p);
            if (!mapped.in_domain) continue;
            for (std::size_t l = 0; l < cell.k.size(); ++l) {
                const double diff = mapped.point[l] - grid_center_coord(n, cell.k[l]);
                if (!(std::fabs(diff) <= cell_half)) {
                    inside = false;
                    break;
                }
            }
            if (!inside) continue;
            cell_sum += sample_ys[i];
            ++cell_count;
        }
        numerator += cell_sum;
        denominator += cell_count;
    }
    if (denominator == 0) return 0.0;
    return numerator / static_cast<double>(denominator);
}

double binomial_reciprocal_expectation(std::size_t m, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_reciprocal_expectation: p in (0,1]");
    if (m < 1) throw std::invalid_argument("binomial_reciprocal_expectation: m >= 1");
    // pmf recursion; underflow at the tails is harmless
    double expectation = 0.0;
    double pmf;
    if (p < 1.0) {
        pmf = std::exp(static_cast<double>(m) * std::log1p(-p));  // P[T=0]
        for (std::size_t l = 1; l <= m; ++l) {
            pmf *= (static_cast<double>(m - l + 1) / static_cast<double>(l)) * (p / (1.0 - p));
            expectation += pmf / static_cast<double>(l);
        }
    } else {
        expectation = 1.0 / static_cast<double>(m);  // T == m almost surely
    }
    return expectation;
}

BinomialReciprocalReport binomial_reciprocal_check(std::size_t m, double p, std::size_t trials, std::uint64_t seed) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_reciprocal_check: p must lie in (0,1]");
    if (trials < 10000) throw std::invalid_argument("binomial_reciprocal_check: need at least 1e4 trials");
    if (m < 1) throw std::invalid_argument("binomial_reciprocal_check: m must be >= 1");

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(hash64(seed, kStreamBinomial, t));
        std::size_t count = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (rng.uniform01() < p) ++count;
        const double value = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;
        sum += value;
        sum_sq += value * value;
    }
    const double estimate = sum / static_cast<double>(trials);
    const double se = sample_std_error(sum, sum_sq, trials);
    const double bound = 2.0 / ((static_cast<double>(m) + 1.0) * p);

    BinomialReciprocalReport report;
    report.bound_check = {"binomial-reciprocal bound m=" + std::to_string(m) + " p=" + std::to_string(p),
                          estimate, bound, trials, se, estimate <= bound + 3.0 * se};
    report.exact_value = binomial_reciprocal_expectation(m, p);
    report.exact_check = {"binomial-reciprocal exact-pmf m=" + std::to_string(m) + " p=" + std::to_string(p),
                          estimate, report.exact_value, trials, se,
                          std::fabs(estimate - report.exact_value) <= 3.0 * se};
    return report;
}

BiasVarianceReport bias_variance_check(std::shared_ptr<const Atlas> atlas, const TargetFunction& target,
                                       const NoiseSpec& noise, std::size_t m, std::size_t trials,
                                       std::uint64_t seed, const BiasVarianceOptions& options) {
    if (!atlas) throw std::invalid_argument("bias_variance_check: null atlas");
    if (m < 1 || trials < 2) throw std::invalid_argument("bias_variance_check: need m >= 1 and trials >= 2");
    const Manifold& manifold = *atlas->manifold;
    const int n = options.n > 0 ? options.n : choose_n(m, target.smoothness, manifold.intrinsic_dim());
    const double M = target.sup_bound + noise.bound();
    const double margin = M - target.sup_bound;

    // fixed input design and fixed query grid
    const std::vector<AmbientPoint> xs = sample_inputs(manifold, m, {}, hash64(seed, kStreamDecompDesign));
    const std::vector<AmbientPoint> queries =
        sample_inputs(manifold, options.queries, {}, hash64(seed, kStreamDecompQuery));

    std::vector<double> f_rho_x(m), f_rho_q(options.queries);
    for (std::size_t i = 0; i < m; ++i) f_rho_x[i] = target(xs[i]);
    for (std::size_t qi = 0; qi < options.queries; ++qi) f_rho_q[qi] = target(queries[qi]);

    // conditional mean estimator: outputs replaced by their means
    SampleSet tilde_set;
    tilde_set.points = xs;
    tilde_set.ys = f_rho_x;
    tilde_set.bound_M = M;
    const DeepNetEstimator tilde(atlas, tilde_set, n);
    std::vector<double> f_tilde(options.queries);
    for (std::size_t qi = 0; qi < options.queries; ++qi) f_tilde[qi] = tilde.predict(queries[qi], options.mode);

    double bias_sq = 0.0;
    for (std::size_t qi = 0; qi < options.queries; ++qi) {
        const double b = f_tilde[qi] - f_rho_q[qi];
        bias_sq += b * b;
    }
    bias_sq /= static_cast<double>(options.queries);

    double cross_sum = 0.0, cross_sum_sq = 0.0;
    double lhs_sum = 0.0;
    double var_sum = 0.0;
    double resid_sum = 0.0, resid_sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        SampleSet set;
        set.points = xs;
        set.bound_M = M;
        set.ys.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            double eps = 0.0;
            if (noise.kind == NoiseKind::Uniform && noise.half_width > 0.0) {
                Rng rng(hash64(seed, kStreamDecompNoise, t * m + i));
                eps = rng.uniform(-noise.half_width, noise.half_width);
            } else if (noise.kind == NoiseKind::TruncatedGaussian) {
                Rng rng(hash64(seed, kStreamDecompNoise, t * m + i));
                eps = rng.truncated_normal(noise.sigma, margin);
            }
            set.ys[i] = f_rho_x[i] + eps;
        }
        const DeepNetEstimator est(atlas, set, n);
        double cross_t = 0.0, lhs_t = 0.0, var_t = 0.0;
        for (std::size_t qi = 0; qi < options.queries; ++qi) {
            const double fs = est.predict(queries[qi], options.mode);
            const double dev = fs - f_tilde[qi];
            const double bias = f_tilde[qi] - f_rho_q[qi];
            const double err = fs - f_rho_q[qi];
            cross_t += dev * bias;
            lhs_t += err * err;
            var_t += dev * dev;
        }
        cross_t /= static_cast<double>(options.queries);
        lhs_t /= static_cast<double>(options.queries);
        var_t /= static_cast<double>(options.queries);
        const double resid_t = lhs_t - var_t - bias_sq;
        cross_sum += cross_t;
        cross_sum_sq += cross_t * cross_t;
        lhs_sum += lhs_t;
        var_sum += var_t;
        resid_sum += resid_t;
        resid_sum_sq += resid_t * resid_t;
    }

    BiasVarianceReport report;
    const double cross_mean = cross_sum / static_cast<double>(trials);
    const double cross_se = sample_std_error(cross_sum, cross_sum_sq, trials);
    report.cross_term = {"bias-variance cross-term", cross_mean, 0.0, trials, cross_se,
                         std::fabs(cross_mean) <= 3.0 * cross_se + 1e-12};
    const double resid_mean = resid_sum / static_cast<double>(trials);
    const double resid_se = sample_std_error(resid_sum, resid_sum_sq, trials);
    report.decomposition = {"bias-variance residual", resid_mean, 0.0, trials, resid_se,
                            std::fabs(resid_mean) <= 3.0 * resid_se + 1e-12};
    report.lhs_mean = lhs_sum / static_cast<double>(trials);
    report.variance_mean = var_sum / static_cast<double>(trials);
    report.bias_sq = bias_sq;
    return report;
}

}  // namespace localnet
