#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fracwrmg/fracdisc.hpp"
#include "oracles.hpp"

using namespace fracwrmg;

TEST_CASE("closed-form L1 weights on unit steps") {
    const auto mesh = make_uniform_mesh(2.0, 2);
    const L1Coefficients d(mesh, 0.5);
    // 1/Gamma(1.5) = 2/sqrt(pi)
    CHECK(d(1, 1) == doctest::Approx(1.1283791670955126).epsilon(1e-14));
    CHECK(d(2, 1) == doctest::Approx(1.1283791670955126).epsilon(1e-14));
    CHECK(d(2, 2) == doctest::Approx(0.46738995451021814).epsilon(1e-13));
    CHECK(d_coeff(mesh, 0.5, 2, 2) == d(2, 2));
}

TEST_CASE("first weight on quarter steps") {
    const auto mesh = make_uniform_mesh(1.0, 4);
    for (std::size_t m = 1; m <= 4; ++m)
        CHECK(d_coeff(mesh, 0.5, m, 1) == doctest::Approx(2.2567583341910251).epsilon(1e-13));
}

TEST_CASE("weight indices are range checked") {
    const L1Coefficients d(make_uniform_mesh(1.0, 4), 0.5);
    CHECK_THROWS_AS(d(0, 1), std::out_of_range);
    CHECK_THROWS_AS(d(2, 3), std::out_of_range);
    CHECK_THROWS_AS(d(5, 1), std::out_of_range);
    CHECK_THROWS_AS(L1Coefficients(make_uniform_mesh(1.0, 4), 1.0), std::invalid_argument);
}

TEST_CASE("two-step matrix") {
    const auto r = assemble_dense_R(make_uniform_mesh(2.0, 2), 0.5);
    CHECK(r(2, 2) == doctest::Approx(1.1283791670955126).epsilon(1e-13));
    CHECK(r(2, 1) == doctest::Approx(-0.66098921258529444).epsilon(1e-13));
    CHECK(r(2, 1) + r(2, 2) == doctest::Approx(0.46738995451021814).epsilon(1e-13));
    CHECK(r(1, 2) == 0.0);
}

TEST_CASE("entries above the diagonal are exactly zero") {
    const auto mesh = make_graded_mesh(1.0, 16, 0.3);
    const auto r = assemble_dense_R(mesh, 0.3);
    const L1Coefficients d(mesh, 0.3);
    for (std::size_t m = 1; m <= 16; ++m)
        for (std::size_t j = m + 1; j <= 16; ++j) {
            CHECK(r(m, j) == 0.0);
            CHECK(d.r_entry(m, j) == 0.0);
        }
}

TEST_CASE("row sums equal the last weight") {
    for (double delta : {0.1, 0.4, 0.6, 0.9}) {
        for (bool graded : {true, false}) {
            const std::size_t M = 300;
            const auto mesh = graded ? make_graded_mesh(1.0, M, delta) : make_uniform_mesh(1.0, M);
            const auto r = assemble_dense_R(mesh, delta);
            const L1Coefficients d(mesh, delta);
            for (std::size_t m = 1; m <= M; ++m) {
                double sum = 0.0;
                for (double v : r.row(m))
                    sum += v;
                CHECK(std::abs(sum - d(m, m)) <= 1e-12 * d(m, m));
            }
        }
    }
}

TEST_CASE("sign pattern") {
    for (double delta : {0.2, 0.5, 0.8}) {
        const auto mesh = make_graded_mesh(1.0, 200, delta);
        const auto r = assemble_dense_R(mesh, delta);
        for (std::size_t m = 1; m <= 200; ++m) {
            REQUIRE(r(m, m) > 0.0);
            for (std::size_t j = 1; j < m; ++j)
                REQUIRE(r(m, j) < 0.0);
        }
    }
}

TEST_CASE("uniform meshes give a Toeplitz matrix") {
    for (double delta : {0.3, 0.7}) {
        const auto r = assemble_dense_R(make_uniform_mesh(1.0, 64), delta);
        for (std::size_t m = 1; m < 64; ++m)
            for (std::size_t j = 1; j <= m; ++j)
                CHECK(std::abs(r(m, j) - r(m + 1, j + 1)) <= 1e-13 * std::abs(r(m, j)));
    }
}

TEST_CASE("entries match quadrature of the defining integral") {
    for (double delta : {0.2, 0.5, 0.8}) {
        for (bool graded : {true, false}) {
            const std::size_t M = 64;
            const auto mesh = graded ? make_graded_mesh(1.0, M, delta) : make_uniform_mesh(1.0, M);
            const auto r = assemble_dense_R(mesh, delta);
            double worst = 0.0;
            for (std::size_t m = 1; m <= M; ++m)
                for (std::size_t j = 1; j <= m; ++j) {
                    const double q = oracle::r_entry_quadrature(mesh, delta, m, j);
                    worst = std::max(worst, std::abs(r(m, j) - q) / std::abs(q));
                }
            CHECK(worst <= 1e-8);
        }
    }
}

TEST_CASE("applying R") {
    const auto mesh = make_graded_mesh(1.0, 3, 0.5);
    const auto r = assemble_dense_R(mesh, 0.5);
    const std::vector<double> zero(3, 0.0);
    for (double v : apply_caputo_dense(r, zero))
        CHECK(v == 0.0);
    const auto col = apply_caputo_dense(r, std::vector<double>{1.0, 0.0, 0.0});
    CHECK(col[0] == r(1, 1));
    CHECK(col[1] == r(2, 1));
    CHECK(col[2] == r(3, 1));
    CHECK_THROWS_AS(apply_caputo_dense(r, std::vector<double>(2, 0.0)), std::invalid_argument);
}

TEST_CASE("applying R agrees with quadrature entries") {
    const double delta = 0.4;
    const auto mesh = make_graded_mesh(1.0, 32, delta);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> u(32);
    for (double& v : u)
        v = dist(rng);
    const auto y = apply_caputo_dense(assemble_dense_R(mesh, delta), u);
    for (std::size_t m = 1; m <= 32; ++m) {
        double expect = 0.0, scale = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            const double q = oracle::r_entry_quadrature(mesh, delta, m, j);
            expect += q * u[j - 1];
            scale += std::abs(q * u[j - 1]);
        }
        CHECK(std::abs(y[m - 1] - expect) <= 1e-8 * scale);
    }
}

TEST_CASE("initial value lift") {
    const auto mesh = make_graded_mesh(1.0, 8, 0.6);
    const std::vector<double> zero(5, 0.0);
    CHECK(initial_lift(mesh, 0.6, zero).max_abs() == 0.0);

    const auto one = make_uniform_mesh(0.5, 1);
    const auto lift = initial_lift(one, 0.3, std::vector<double>{2.0});
    CHECK(lift(0, 0) == doctest::Approx(std::pow(0.5, -0.3) / std::tgamma(1.7) * 2.0).epsilon(1e-14));
}

TEST_CASE("a constant history has zero discrete derivative") {
    const double delta = 0.35;
    const auto mesh = make_graded_mesh(1.0, 40, delta);
    const std::vector<double> g{0.5, -1.25, 3.0};
    const auto lift = initial_lift(mesh, delta, g);
    const auto r = assemble_dense_R(mesh, delta);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto ru = apply_caputo_dense(r, std::vector<double>(40, g[n]));
        for (std::size_t m = 0; m < 40; ++m)
            CHECK(std::abs(ru[m] - lift(n, m)) <= 1e-12 * std::abs(lift(n, m)));
    }
}

TEST_CASE("dense matrix csv dump") {
    const auto r = assemble_dense_R(make_uniform_mesh(1.0, 3), 0.5);
    std::ostringstream os;
    r.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "row,col,value");
    int rows = 0;
    while (std::getline(is, line))
        ++rows;
    CHECK(rows == 6);
}
