#include "doctest.h"

#include <cmath>

#include "localnet/netcore.hpp"
#include "localnet/rng.hpp"

using namespace localnet;

TEST_CASE("heaviside closed-boundary semantics") {
    CHECK(heaviside(-0.5) == 0.0);
    CHECK(heaviside(0.0) == 1.0);
    CHECK(heaviside(2.3) == 1.0);
    CHECK(heaviside(-0.0) == 1.0);
    CHECK_THROWS_AS(heaviside(std::nan("")), std::invalid_argument);
}

TEST_CASE("square rectifier") {
    CHECK(square_rectifier(-1.0) == 0.0);
    CHECK(square_rectifier(2.0) == 4.0);
    CHECK(square_rectifier(0.0) == 0.0);
    CHECK_THROWS_AS(square_rectifier(std::nan("")), std::invalid_argument);
}

TEST_CASE("grid centers") {
    const auto q1 = grid_centers({1, 1});
    REQUIRE(q1.size() == 2);
    CHECK(q1[0][0] == -0.5);
    CHECK(q1[1][0] == 0.5);

    const auto q2 = grid_centers({2, 1});
    REQUIRE(q2.size() == 4);
    CHECK(q2[0][0] == -0.75);
    CHECK(q2[1][0] == -0.25);
    CHECK(q2[2][0] == 0.25);
    CHECK(q2[3][0] == 0.75);

    const auto n1d2 = grid_centers({1, 2});
    REQUIRE(n1d2.size() == 4);
    CHECK(n1d2[0] == std::vector<double>{-0.5, -0.5});
    CHECK(n1d2[1] == std::vector<double>{-0.5, 0.5});
    CHECK(n1d2[2] == std::vector<double>{0.5, -0.5});
    CHECK(n1d2[3] == std::vector<double>{0.5, 0.5});
}

TEST_CASE("grid center formula and spacing") {
    for (int q : {1, 2, 3, 5, 8}) {
        for (int j = 1; j <= 2 * q; ++j)
            CHECK(grid_center_coord(q, j) == static_cast<double>(2 * j - 2 * q - 1) / (2.0 * q));
        for (int j = 1; j < 2 * q; ++j)
            CHECK(grid_center_coord(q, j + 1) - grid_center_coord(q, j) ==
                  doctest::Approx(1.0 / q).epsilon(1e-15));
    }
    // (2*resolution)^dim centers
    CHECK(grid_centers({3, 2}).size() == 36);
}

TEST_CASE("localization net matches the closed cube") {
    // r=1, q=1, j=1 is the cube [-1, 0]
    LocalizationNet net{1, 1, {1}};
    CHECK(localization_eval(net, {-0.5}) == 1.0);
    CHECK(localization_eval(net, {0.0}) == 1.0);  // closed boundary
    CHECK(localization_eval(net, {0.25}) == 0.0);
    CHECK(localization_eval(net, {-1.0}) == 1.0);

    LocalizationNet net2{2, 2, {1, 2}};  // cube [-1,-0.5] x [-0.5,0]
    CHECK(localization_eval(net2, {-0.9, -0.1}) == 1.0);
    CHECK(localization_eval(net2, {-0.9, 0.1}) == 0.0);
    CHECK(localization_eval(net2, {-0.4, -0.1}) == 0.0);
}

TEST_CASE("inner sum dichotomy: 1/2 on the cube, <= -1/2 off it") {
    Rng rng(2024);
    for (int iter = 0; iter < 5000; ++iter) {
        const int r = 1 + static_cast<int>(rng.uniform_index(3));
        const int q = 1 + static_cast<int>(rng.uniform_index(8));
        LocalizationNet net{r, q, {}};
        std::vector<double> xi(static_cast<std::size_t>(r));
        for (int l = 0; l < r; ++l) {
            net.index.push_back(1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(2 * q))));
            xi[static_cast<std::size_t>(l)] = rng.uniform(-1.2, 1.2);
        }
        const double inner = localization_inner_sum(net, xi);
        if (cube_indicator_oracle(r, q, net.index, xi) == 1) {
            CHECK(inner == 0.5);
        } else {
            CHECK(inner <= -0.5);
        }
    }
}

TEST_CASE("localization net equals the indicator oracle on random and boundary points") {
    Rng rng(777);
    std::size_t boundary_cases = 0;
    for (int iter = 0; iter < 20000; ++iter) {
        const int r = 1 + static_cast<int>(rng.uniform_index(3));
        const int q = 1 + static_cast<int>(rng.uniform_index(8));
        LocalizationNet net{r, q, {}};
        std::vector<double> xi(static_cast<std::size_t>(r));
        const bool boundary = iter % 5 == 0;
        for (int l = 0; l < r; ++l) {
            const int j = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(2 * q)));
            net.index.push_back(j);
            if (boundary) {
                const double face = grid_center_coord(q, j) + (rng.bernoulli(0.5) ? 1.0 : -1.0) / (2.0 * q);
                xi[static_cast<std::size_t>(l)] = face;
                ++boundary_cases;
            } else {
                xi[static_cast<std::size_t>(l)] = rng.uniform(-1.1, 1.1);
            }
        }
        const double net_value = localization_eval(net, xi);
        const int oracle_value = cube_indicator_oracle(r, q, net.index, xi);
        REQUIRE(net_value == static_cast<double>(oracle_value));
    }
    CHECK(boundary_cases > 1000);
}

TEST_CASE("dyadic boundary points sit inside both adjacent cubes") {
    // for power-of-two q the face value zeta + 1/(2q) is exact, so the
    // sigma0(0)=1 convention is what makes the point land in both cubes
    for (int q : {1, 2, 4, 8}) {
        for (int j = 1; j < 2 * q; ++j) {
            const double face = grid_center_coord(q, j) + 1.0 / (2.0 * q);
            LocalizationNet left{1, q, {j}};
            LocalizationNet right{1, q, {j + 1}};
            CHECK(localization_eval(left, {face}) == 1.0);
            CHECK(localization_eval(right, {face}) == 1.0);
        }
    }
}

TEST_CASE("axis cube enumeration") {
    CHECK(axis_cubes_containing(-0.6, 2) == std::vector<int>{1});
    CHECK(axis_cubes_containing(-0.5, 2) == std::vector<int>{1, 2});  // shared face
    CHECK(axis_cubes_containing(-1.0, 2) == std::vector<int>{1});
    CHECK(axis_cubes_containing(1.0, 2) == std::vector<int>{4});
    CHECK(axis_cubes_containing(1.5, 2).empty());
    CHECK(axis_cubes_containing(0.0, 2) == std::vector<int>{2, 3});
}

TEST_CASE("cube enumeration matches the oracle") {
    Rng rng(31337);
    for (int iter = 0; iter < 4000; ++iter) {
        const int q = 1 + static_cast<int>(rng.uniform_index(8));
        const int r = 1 + static_cast<int>(rng.uniform_index(3));
        std::vector<double> point(static_cast<std::size_t>(r));
        for (auto& c : point)
            c = rng.bernoulli(0.25) ? grid_center_coord(q, 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(2 * q)))) + 1.0 / (2.0 * q)
                                    : rng.uniform(-1.05, 1.05);
        const auto cubes = cubes_containing(point, q);
        // every listed cube passes the oracle; brute-force count agrees
        std::size_t expected = 1;
        for (double c : point) {
            std::size_t axis_count = 0;
            for (int j = 1; j <= 2 * q; ++j)
                if (std::fabs(c - grid_center_coord(q, j)) <= 1.0 / (2.0 * q)) ++axis_count;
            expected *= axis_count;
        }
        CHECK(cubes.size() == expected);
        for (const auto& j : cubes)
            CHECK(cube_indicator_oracle(r, q, j, point) == 1);
        // lexicographic and duplicate-free
        for (std::size_t i = 1; i < cubes.size(); ++i) CHECK(cubes[i - 1] < cubes[i]);
    }
}
