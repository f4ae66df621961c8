#ifndef LOCALNET_ORACLE_HPP
#define LOCALNET_ORACLE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "localnet/estimator.hpp"

namespace localnet {

// Monte-Carlo verification record. For bound checks, pass means
// estimate <= bound + 3 * std_error; for identity checks, pass means
// |estimate - target| <= 3 * std_error.
struct McReport {
    std::string name;
    double estimate = 0.0;
    double bound_or_target = 0.0;
    std::size_t trials = 0;
    double std_error = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

// Brute-force cell membership: loops over every cube in the assignment
// table (plus an optional overlay, e.g. an estimator's extensions) with
// direct per-coordinate comparisons, then scans every chart-grid cell the
// same way. No Heaviside network evaluation anywhere on this path.
std::vector<CellIndex> cell_membership(const Atlas& atlas, int n, const AmbientPoint& x,
                                       const std::map<CubeIndex, int>* assignment_overlay = nullptr);

// Brute-force partition estimate: membership-weighted mean of the outputs
// of samples sharing any of x's cells. Accumulates per cell in sample
// order, then across cells in lexicographic order (the canonical order the
// estimator uses), so agreement with predict_interior is exact.
double partition_local_average(const Atlas& atlas, int n, const std::vector<AmbientPoint>& sample_points,
                               const std::vector<double>& sample_ys, const AmbientPoint& x,
                               const std::map<CubeIndex, int>* assignment_overlay = nullptr);

// Exact E[ I_{T>0} / T ] for T ~ Binomial(m, p), by direct pmf summation.
double binomial_reciprocal_expectation(std::size_t m, double p);

struct BinomialReciprocalReport {
    McReport bound_check;  // estimate vs 2/((m+1)p)
    McReport exact_check;  // Monte-Carlo against the exact pmf sum
    double exact_value = 0.0;
};

// Simulates T ~ Binomial(m, p) and checks E[I_{T>0}/T] <= 2/((m+1)p).
BinomialReciprocalReport binomial_reciprocal_check(std::size_t m, double p, std::size_t trials, std::uint64_t seed);

struct BiasVarianceOptions {
    std::size_t queries = 512;  // fixed query grid backing the empirical measure
    int n = 0;                  // 0: choose_n(m, s, d)
    DeepNetEstimator::Mode mode = DeepNetEstimator::Mode::Feedback;
};

struct BiasVarianceReport {
    McReport cross_term;     // mean of <f_S - E[f_S|x], E[f_S|x] - f_rho>_mu, target 0
    McReport decomposition;  // |E||f_S-f_rho||^2 - (variance + bias^2)|, target 0
    double lhs_mean = 0.0;
    double variance_mean = 0.0;
    double bias_sq = 0.0;
};

// Bias-variance orthogonality check: fixed input design, outputs resampled
// per trial, conditional mean computed analytically by substituting f_rho
// for the outputs (the weights depend on the inputs only).
BiasVarianceReport bias_variance_check(std::shared_ptr<const Atlas> atlas, const TargetFunction& target,
                                       const NoiseSpec& noise, std::size_t m, std::size_t trials,
                                       std::uint64_t seed, const BiasVarianceOptions& options = {});

}  // namespace localnet

#endif
