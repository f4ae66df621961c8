#include "doctest.h"

#include <cmath>
#include <map>
#include <memory>

#include "localnet/charts.hpp"
#include "localnet/netcore.hpp"

using namespace localnet;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const Manifold> shared_circle(double r = 0.9) {
    return std::make_shared<Manifold>(Manifold::circle(r));
}
}  // namespace

TEST_CASE("embedding constant: analytic values and sampled bounds") {
    const Manifold circle = Manifold::circle(0.9);
    CHECK(estimate_embedding_constant(circle, 10000, 3) == kPi / 2);

    // sampled ratio stays inside [1, pi/2]; the maximizer is the antipodal pair
    const double sampled = sampled_embedding_ratio(circle, 10000, 3);
    CHECK(sampled >= 1.0);
    CHECK(sampled <= kPi / 2 + 1e-6);

    CHECK(estimate_embedding_constant(Manifold::sphere(0.9), 5000, 3) == kPi / 2);
    CHECK(estimate_embedding_constant(Manifold::flat_torus(0.6, 0.45), 5000, 3) == kPi / 2);

    // no analytic value for the swiss roll: safety-inflated sample, >= 1
    const Manifold roll = Manifold::swiss_roll();
    const double c0 = estimate_embedding_constant(roll, 5000, 3, 1.1);
    CHECK(c0 >= 1.0);
    CHECK(c0 == doctest::Approx(1.1 * sampled_embedding_ratio(roll, 5000, 3)));

    CHECK_THROWS_AS(estimate_embedding_constant(circle, 10, 3), std::invalid_argument);
}

TEST_CASE("grid resolution selection") {
    // C0=pi/2, D=2, min delta = 0.45*pi: raw value 2*(pi/2)*sqrt(2)/(0.45*pi) = 3.1427 -> 4
    CHECK(select_grid_resolution(kPi / 2, 2, 0.45 * kPi) == 4);
    CHECK(select_grid_resolution(1.0, 1, 2.0) == 1);
    // doubling C0 doubles the pre-ceiling value
    const double raw = grid_resolution_raw(1.3, 3, 0.7);
    CHECK(grid_resolution_raw(2.6, 3, 0.7) == doctest::Approx(2.0 * raw).epsilon(1e-15));
    // shrinking delta strictly increases the raw value
    CHECK(grid_resolution_raw(1.3, 3, 0.5) > raw);
}

TEST_CASE("atlas cover on the circle") {
    auto manifold = shared_circle();
    AtlasOptions options;
    options.delta_policy = DeltaPolicy::fixed(kPi * 0.9 / 2.0);
    options.assignment_samples = 20000;
    const Atlas atlas = build_atlas(manifold, options, 11);

    CHECK(atlas.charts.size() >= 4);  // half-radius balls of length pi*0.9/2 need >= 4 centers
    CHECK(atlas.C0 == kPi / 2);
    CHECK(atlas.q_star == 4);
    CHECK(select_grid_resolution(atlas) == atlas.q_star);

    // every sampled point is within delta/2 of some center, up to the fill
    // resolution of the cover's candidate set
    Rng rng(99);
    for (int iter = 0; iter < 10000; ++iter) {
        const AmbientPoint x = manifold->embed(manifold->sample_param(rng));
        double best = 1e9;
        for (const auto& chart : atlas.charts) best = std::min(best, chart.distance_to_center(x));
        CHECK(best <= (kPi * 0.9 / 4.0) * 1.02);
    }

    // determinism
    const Atlas again = build_atlas(manifold, options, 11);
    CHECK(atlas.to_json() == again.to_json());

    // a ball wider than the diameter needs a single chart
    AtlasOptions wide;
    wide.delta_policy = DeltaPolicy::fixed(2.0 * manifold->geodesic_diameter());
    wide.assignment_samples = 5000;
    const Atlas one = build_atlas(manifold, wide, 11);
    CHECK(one.charts.size() == 1);
}

TEST_CASE("cube-to-chart assignment") {
    auto manifold = shared_circle();
    AtlasOptions options;
    options.assignment_samples = 50000;
    const Atlas atlas = build_atlas(manifold, options, 5);

    // a cube far outside the manifold has no assignment; q*=4 makes (1,1)
    // the corner cube [-1,-0.75]^2, entirely inside radius < 0.9
    REQUIRE(atlas.q_star == 4);
    CHECK_FALSE(assign_chart_to_cube(atlas, {1, 1}).has_value());
    CHECK_THROWS_AS(assign_chart_to_cube(atlas, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(assign_chart_to_cube(atlas, {1}), std::invalid_argument);

    // every assigned cube's chart ball contains the points that hit the cube
    Rng rng(17);
    for (int iter = 0; iter < 10000; ++iter) {
        const AmbientPoint x = manifold->embed(manifold->sample_param(rng));
        const auto cubes = cubes_containing(x, atlas.q_star);
        CHECK_FALSE(cubes.empty());
        bool covered = false;
        for (const auto& j : cubes) {
            const auto idx = atlas.resolve_cube_chart(j, x);
            REQUIRE(idx.has_value());
            const Chart& chart = atlas.charts[static_cast<std::size_t>(*idx)];
            CHECK(chart.distance_to_center(x) <= chart.delta() + 1e-12);
            covered = true;
        }
        CHECK(covered);
    }
}

TEST_CASE("analytic chart map on the circle") {
    auto manifold = shared_circle();
    const double delta = 0.9;
    const Chart chart = Chart::analytic(manifold, {0.7}, delta);

    const auto at_center = chart.map(chart.center());
    CHECK(at_center.in_domain);
    CHECK(at_center.point[0] == 0.0);

    // arc offsets +-t map to +-t/delta
    for (double t : {0.1, 0.35, 0.81}) {
        const auto plus = chart.map(manifold->embed({0.7 + t / 0.9}));
        const auto minus = chart.map(manifold->embed({0.7 - t / 0.9}));
        CHECK(plus.in_domain);
        CHECK(plus.point[0] == doctest::Approx(t / delta).epsilon(1e-12));
        CHECK(minus.point[0] == doctest::Approx(-t / delta).epsilon(1e-12));
    }

    // out of the ball: clamped and flagged
    const auto outside = chart.map(manifold->embed({0.7 + kPi * 0.8}));
    CHECK_FALSE(outside.in_domain);
    CHECK(std::fabs(outside.point[0]) <= 1.0);

    CHECK_THROWS_AS(chart.map({0.2, 0.2}), std::domain_error);  // off the manifold
}

TEST_CASE("distortion constants: circle, torus, sphere") {
    auto circle = shared_circle();
    const Chart circle_chart = Chart::analytic(circle, {0.7}, 0.45);
    const DistortionEstimate ce = distortion_constants(circle_chart, 2000, 4);
    CHECK(ce.alpha_hat <= ce.beta_hat);
    CHECK(ce.alpha_hat * 0.45 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ce.beta_hat * 0.45 == doctest::Approx(1.0).epsilon(1e-9));

    auto torus = std::make_shared<Manifold>(Manifold::flat_torus(0.6, 0.45));
    const Chart torus_chart = Chart::analytic(torus, {1.0, 2.0}, 0.5);
    const DistortionEstimate te = distortion_constants(torus_chart, 2000, 4);
    CHECK(te.alpha_hat * 0.5 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(te.beta_hat * 0.5 == doctest::Approx(1.0).epsilon(1e-9));

    // sphere log map is radial-isometric and stretches tangentially by
    // theta/sin(theta) at geodesic radius theta*r
    auto sphere = std::make_shared<Manifold>(Manifold::sphere(0.9));
    const double delta = kPi * 0.9 / 2.0;
    const Chart sphere_chart = Chart::analytic(sphere, {1.1, 0.4}, delta);
    const DistortionEstimate se = distortion_constants(sphere_chart, 4000, 4);
    CHECK(se.alpha_hat * delta == doctest::Approx(1.0).epsilon(1e-6));
    const double stretch = (kPi / 2.0) / std::sin(kPi / 2.0);
    CHECK(se.beta_hat * delta == doctest::Approx(stretch).epsilon(1e-4));
    CHECK(se.beta_hat * delta <= stretch + 1e-9);

    CHECK_THROWS_AS(distortion_constants(circle_chart, 10, 4), std::invalid_argument);
}

TEST_CASE("bi-Lipschitz bounds hold per assigned cube") {
    for (auto manifold : {std::make_shared<Manifold>(Manifold::circle(0.9)),
                          std::make_shared<Manifold>(Manifold::sphere(0.9))}) {
        CAPTURE(manifold_kind_name(manifold->kind()));
        AtlasOptions options;
        options.assignment_samples = 30000;
        options.distortion_pairs = 3000;
        const Atlas atlas = build_atlas(manifold, options, 23);

        std::map<CubeIndex, std::vector<AmbientPoint>> per_cube;
        Rng rng(888);
        for (int iter = 0; iter < 4000; ++iter) {
            const AmbientPoint x = manifold->embed(manifold->sample_param(rng));
            for (auto& j : cubes_containing(x, atlas.q_star)) per_cube[std::move(j)].push_back(x);
        }
        for (const auto& [cube, points] : per_cube) {
            const auto idx = atlas.chart_for_cube(cube);
            if (!idx) continue;
            const Chart& chart = atlas.charts[static_cast<std::size_t>(*idx)];
            for (std::size_t i = 1; i < points.size() && i < 40; ++i) {
                const double geo = manifold->geodesic(points[i - 1], points[i]);
                if (geo < 1e-9) continue;
                const auto ua = chart.map(points[i - 1]);
                const auto ub = chart.map(points[i]);
                REQUIRE(ua.in_domain);
                REQUIRE(ub.in_domain);
                const double du = dist2(ua.point, ub.point);
                CHECK(du >= atlas.alpha * geo * (1.0 - 1e-9));
                CHECK(du <= atlas.beta * geo * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("square net fitting reproduces affine functions to machine precision") {
    Rng rng(606);
    std::vector<AmbientPoint> train, eval;
    std::vector<double> train_y, eval_y;
    auto f = [](const AmbientPoint& x) { return 0.3 * x[0] - 0.2 * x[1] + 0.05; };
    for (int i = 0; i < 400; ++i) {
        AmbientPoint x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        (i % 4 ? eval : train).push_back(x);
        (i % 4 ? eval_y : train_y).push_back(f(x));
    }
    const SquareNetFit fit = fit_square_net(train, train_y, eval, eval_y, 12, 55, 4, 1e-9);
    CHECK(fit.sup_error < 1e-9);
    CHECK(fit.terms.size() == 12);

    // same seed, same coefficients
    const SquareNetFit fit2 = fit_square_net(train, train_y, eval, eval_y, 12, 55, 4, 1e-9);
    REQUIRE(fit2.terms.size() == fit.terms.size());
    for (std::size_t i = 0; i < fit.terms.size(); ++i) {
        CHECK(fit.terms[i].a == fit2.terms[i].a);
        CHECK(fit.terms[i].b == fit2.terms[i].b);
        CHECK(fit.terms[i].w == fit2.terms[i].w);
    }
}

TEST_CASE("fitted circle chart: budgeted width, sup error, distortion") {
    auto manifold = shared_circle();
    const Chart teacher = Chart::analytic(manifold, {0.7}, 0.45);
    const ChartFitReport report = fit_chart_net(teacher, 2024, {});
    CHECK(report.sup_error < 1e-3);
    REQUIRE(report.chart.backend() == Chart::Backend::FittedNet);
    REQUIRE(report.chart.net().size() == 1);
    CHECK(report.chart.net()[0].size() == 12);  // (D+2)(D+1) with D=2

    // fitted map stays close to the teacher on fresh in-ball points
    Rng rng(31);
    double worst = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
        const double offset = rng.uniform(-0.45, 0.45) / 0.9;
        const AmbientPoint x = manifold->embed({0.7 + offset});
        worst = std::max(worst, std::fabs(report.chart.map(x).point[0] - teacher.map(x).point[0]));
    }
    CHECK(worst < 1e-3);

    const DistortionEstimate ana = distortion_constants(teacher, 2000, 8);
    const DistortionEstimate fit = distortion_constants(report.chart, 2000, 8);
    CHECK(std::fabs(fit.alpha_hat / ana.alpha_hat - 1.0) < 0.10);
    CHECK(std::fabs(fit.beta_hat / ana.beta_hat - 1.0) < 0.10);

    // unreachable target errors out and reports the achieved residual
    ChartFitOptions strict;
    strict.target_sup_error = 1e-14;
    strict.resample_cap = 1;
    strict.train_points = 256;
    strict.eval_points = 512;
    CHECK_THROWS_AS(fit_chart_net(teacher, 2024, strict), std::runtime_error);
}

TEST_CASE("atlas JSON round trip preserves charts and assignment") {
    auto manifold = shared_circle();
    AtlasOptions options;
    options.assignment_samples = 8000;
    Atlas atlas = build_atlas(manifold, options, 31);
    const Chart teacher = Chart::analytic(manifold, {0.2}, 0.45);
    atlas.charts.push_back(fit_chart_net(teacher, 5, {}).chart);  // mixed backends survive

    const Atlas copy = Atlas::from_json(atlas.to_json());
    CHECK(copy.q_star == atlas.q_star);
    CHECK(copy.C0 == atlas.C0);
    CHECK(copy.assignment == atlas.assignment);
    REQUIRE(copy.charts.size() == atlas.charts.size());
    Rng rng(77);
    for (int iter = 0; iter < 50; ++iter) {
        const AmbientPoint x = manifold->embed(manifold->sample_param(rng));
        for (std::size_t c = 0; c < atlas.charts.size(); ++c) {
            const auto a = atlas.charts[c].map(x);
            const auto b = copy.charts[c].map(x);
            CHECK(a.in_domain == b.in_domain);
            CHECK(a.point == b.point);
        }
    }
}
