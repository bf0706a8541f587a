#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fracwrmg/hmatrix.hpp"
#include "oracles.hpp"

using namespace fracwrmg;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = dist(rng);
    return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("interval admissibility") {
    CHECK(admissible(Interval{0.5, 0.75}, Interval{0.0, 0.25}));
    CHECK_FALSE(admissible(Interval{0.5, 1.0}, Interval{0.0, 0.25}));
    CHECK_FALSE(admissible(Interval{0.5, 1.0}, Interval{0.4, 0.6}));
    CHECK_FALSE(admissible(Interval{0.0, 0.25}, Interval{0.5, 0.75}));
}

TEST_CASE("block intervals") {
    const auto mesh = make_uniform_mesh(1.0, 8);
    const BlockIndex b{5, 8, 1, 2};
    CHECK(row_interval(mesh, b).lo == doctest::Approx(0.5));
    CHECK(row_interval(mesh, b).hi == doctest::Approx(1.0));
    // columns 1..2 carry hat functions reaching t_3
    CHECK(col_interval(mesh, b).lo == doctest::Approx(0.0));
    CHECK(col_interval(mesh, b).hi == doctest::Approx(0.375));
    const BlockIndex last{1, 8, 7, 8};
    CHECK(col_interval(mesh, last).hi == doctest::Approx(1.0));
}

TEST_CASE("Taylor coefficients") {
    CHECK(taylor_coefficient(0.3, 0) == 1.0);
    CHECK(taylor_coefficient(0.3, 1) == doctest::Approx(-0.3));
    CHECK(taylor_coefficient(0.3, 2) == doctest::Approx(0.3 * 1.3 / 2.0));
    // c_nu = (-1)^nu binom(delta + nu - 1, nu)
    CHECK(taylor_coefficient(0.5, 3) == doctest::Approx(-0.5 * 1.5 * 2.5 / 6.0));
}

TEST_CASE("zeroth column of A is 1/Gamma(1-delta)") {
    const auto mesh = make_uniform_mesh(1.0, 64);
    const BlockIndex b{49, 64, 1, 16};
    REQUIRE(admissible(mesh, b));
    const auto f = lowrank_factors(mesh, 0.5, b, 6);
    CHECK(f.a.rows() == 16);
    CHECK(f.b.rows() == 16);
    CHECK(f.a.cols() == 6);
    for (Eigen::Index i = 0; i < f.a.rows(); ++i)
        CHECK(f.a(i, 0) == doctest::Approx(0.5641895835477563).epsilon(1e-14));
}

TEST_CASE("low-rank factors reject non-admissible blocks") {
    const auto mesh = make_uniform_mesh(1.0, 64);
    CHECK_THROWS_AS(lowrank_factors(mesh, 0.5, BlockIndex{33, 64, 1, 32}, 10), std::invalid_argument);
    CHECK_THROWS_AS(lowrank_factors(mesh, 0.5, BlockIndex{1, 16, 49, 64}, 10), std::invalid_argument);
    CHECK_THROWS_AS(lowrank_factors(mesh, 0.5, BlockIndex{49, 64, 1, 16}, 0), std::invalid_argument);
}

TEST_CASE("every admissible block is reproduced to 1e-8 with rank 20") {
    for (double delta : {0.2, 0.5, 0.8}) {
        for (bool graded : {true, false}) {
            const auto mesh = graded ? make_graded_mesh(1.0, 64, delta) : make_uniform_mesh(1.0, 64);
            const Eigen::MatrixXd r = oracle::dense_r(mesh, delta);
            const auto h = HMatrix::build(mesh, delta, {20, 2});
            int blocks = 0;
            h.for_each_leaf([&](const HNode& node) {
                if (node.kind() != NodeKind::LowRank)
                    return;
                ++blocks;
                const auto& b = node.block;
                const auto f = lowrank_factors(mesh, delta, b, 20);
                const Eigen::MatrixXd approx = f.a * f.b.transpose();
                const Eigen::MatrixXd exact = r.block(static_cast<Eigen::Index>(b.row_lo - 1),
                                                      static_cast<Eigen::Index>(b.col_lo - 1),
                                                      static_cast<Eigen::Index>(b.rows()),
                                                      static_cast<Eigen::Index>(b.cols()));
                CHECK((approx - exact).cwiseAbs().maxCoeff() <= 1e-8 * exact.cwiseAbs().maxCoeff());
            });
            CHECK(blocks > 0);
        }
    }
}

TEST_CASE("small operators are a single dense block") {
    const auto mesh = make_graded_mesh(1.0, 32, 0.4);
    const auto h = HMatrix::build(mesh, 0.4, {20, 32});
    REQUIRE(h.root().kind() == NodeKind::Dense);
    CHECK((h.densify() - oracle::dense_r(mesh, 0.4)).cwiseAbs().maxCoeff() == 0.0);
    const auto s = h.storage();
    CHECK(s.compressed_scalars() == 32 * 33 / 2);
    CHECK(s.compressed_scalars() == s.dense_equivalent_scalars);
}

TEST_CASE("four steps with leaf size two") {
    const auto h = HMatrix::build(make_uniform_mesh(1.0, 4), 0.5, {5, 2});
    REQUIRE(h.root().kind() == NodeKind::Quad);
    const auto& quad = std::get<QuadBlock>(h.root().content);
    CHECK(quad.children[1]->kind() == NodeKind::Zero);
    CHECK(quad.children[0]->kind() == NodeKind::Dense);
    CHECK(quad.children[3]->kind() == NodeKind::Dense);
    CHECK(quad.children[1]->block == BlockIndex{1, 2, 3, 4});
}

TEST_CASE("leaves partition the index set") {
    for (std::size_t M : {5u, 64u, 257u, 600u}) {
        for (std::size_t leaf : {2u, 8u, 32u}) {
            const auto mesh = make_graded_mesh(1.0, M, 0.3);
            const auto h = HMatrix::build(mesh, 0.3, {8, leaf});
            Eigen::MatrixXi cover = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
            h.for_each_leaf([&](const HNode& node) {
                const auto& b = node.block;
                cover.block(static_cast<Eigen::Index>(b.row_lo - 1), static_cast<Eigen::Index>(b.col_lo - 1),
                            static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()))
                    .array() += 1;
                if (node.kind() == NodeKind::LowRank) {
                    CHECK(b.below_diagonal());
                    CHECK(b.col_hi < M);
                }
                if (node.kind() == NodeKind::Zero)
                    CHECK(b.above_diagonal());
            });
            CHECK(cover.minCoeff() == 1);
            CHECK(cover.maxCoeff() == 1);
        }
    }
}

TEST_CASE("densified operator on a strongly graded mesh") {
    const double delta = 0.4;
    const auto mesh = make_graded_mesh(1.0, 512, delta);
    const Eigen::MatrixXd r = oracle::dense_r(mesh, delta);
    const auto h = HMatrix::build(mesh, delta, {20, 32});
    CHECK(h.storage().lowrank_leaves > 0);
    CHECK((h.densify() - r).cwiseAbs().maxCoeff() <= 1e-6 * r.cwiseAbs().maxCoeff());
}

TEST_CASE("truncation error decays with the rank") {
    for (double delta : {0.2, 0.8}) {
        const auto mesh = make_graded_mesh(1.0, 512, delta);
        const Eigen::MatrixXd r = oracle::dense_r(mesh, delta);
        double previous = 0.0;
        for (std::size_t k : {5u, 10u, 15u, 20u}) {
            const Eigen::MatrixXd approx = HMatrix::build(mesh, delta, {k, 32}).densify();
            const double err = (approx - r).cwiseAbs().maxCoeff();
            if (previous > 0.0)
                CHECK(err <= 0.5 * previous);
            previous = err;
        }
    }
}

TEST_CASE("matrix-vector products") {
    const double delta = 0.5;
    SUBCASE("zero vector") {
        const auto h = HMatrix::build(make_graded_mesh(1.0, 100, delta), delta, {10, 8});
        CHECK(max_abs(hmatvec(h, std::vector<double>(100, 0.0))) == 0.0);
    }
    SUBCASE("single dense block is exact") {
        const auto mesh = make_graded_mesh(1.0, 24, delta);
        const auto h = HMatrix::build(mesh, delta, {20, 32});
        const Eigen::MatrixXd x = random_vector(24, 3);
        const Eigen::MatrixXd r = oracle::dense_r(mesh, delta);
        const Eigen::MatrixXd ref = r.triangularView<Eigen::Lower>() * x;
        const auto y = hmatvec(h, to_std(x.col(0)));
        for (Eigen::Index i = 0; i < 24; ++i)
            CHECK(y[static_cast<std::size_t>(i)] == ref(i, 0));
    }
    SUBCASE("random vector against the dense product") {
        for (std::size_t leaf : {4u, 32u}) {
            const auto mesh = make_graded_mesh(1.0, 256, delta);
            const Eigen::MatrixXd r = oracle::dense_r(mesh, delta);
            const auto h = HMatrix::build(mesh, delta, {20, leaf});
            const Eigen::VectorXd x = random_vector(256, 11);
            const Eigen::VectorXd ref = r * x;
            const auto y = hmatvec(h, to_std(x));
            double err = 0.0;
            for (Eigen::Index i = 0; i < 256; ++i)
                err = std::max(err, std::abs(y[static_cast<std::size_t>(i)] - ref(i)));
            CHECK(err <= 1e-6 * x.cwiseAbs().maxCoeff() * r.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("length mismatch") {
        const auto h = HMatrix::build(make_uniform_mesh(1.0, 10), delta);
        CHECK_THROWS_AS(hmatvec(h, std::vector<double>(9, 1.0)), std::invalid_argument);
    }
}

TEST_CASE("matrix-vector product is linear") {
    const double delta = 0.7;
    const auto h = HMatrix::build(make_graded_mesh(1.0, 300, delta), delta, {12, 8});
    const Eigen::VectorXd x = random_vector(300, 1), y = random_vector(300, 2);
    const double alpha = 1.7, beta = -0.35;
    const auto hx = hmatvec(h, to_std(x));
    const auto hy = hmatvec(h, to_std(y));
    const auto hc = hmatvec(h, to_std(alpha * x + beta * y));
    double scale = 0.0;
    for (std::size_t i = 0; i < 300; ++i)
        scale = std::max(scale, std::abs(alpha * hx[i]) + std::abs(beta * hy[i]));
    for (std::size_t i = 0; i < 300; ++i)
        CHECK(std::abs(hc[i] - (alpha * hx[i] + beta * hy[i])) <= 1e-13 * scale);
}

TEST_CASE("multi-column product equals column-wise products") {
    const double delta = 0.3;
    const auto h = HMatrix::build(make_graded_mesh(1.0, 128, delta), delta, {10, 8});
    Eigen::MatrixXd x(128, 3);
    for (Eigen::Index c = 0; c < 3; ++c)
        x.col(c) = random_vector(128, 20 + static_cast<std::uint64_t>(c));
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(128, 3);
    h.multiply_add(x, y, 2.0);
    for (Eigen::Index c = 0; c < 3; ++c) {
        const auto col = hmatvec(h, to_std(x.col(c)));
        for (Eigen::Index i = 0; i < 128; ++i)
            CHECK(y(i, c) == doctest::Approx(2.0 * col[static_cast<std::size_t>(i)]).epsilon(1e-13));
    }
}

TEST_CASE("shifted forward substitution") {
    const double delta = 0.5;
    SUBCASE("zero right-hand side") {
        const auto h = HMatrix::build(make_graded_mesh(1.0, 100, delta), delta, {10, 8});
        CHECK(max_abs(shifted_forward_solve(h, 3.0, std::vector<double>(100, 0.0))) == 0.0);
    }
    SUBCASE("single dense block") {
        const auto mesh = make_graded_mesh(1.0, 30, delta);
        const auto h = HMatrix::build(mesh, delta);
        Eigen::MatrixXd a = oracle::dense_r(mesh, delta);
        a.diagonal().array() += 5.0;
        const Eigen::VectorXd b = random_vector(30, 5);
        const Eigen::VectorXd ref = a.triangularView<Eigen::Lower>().solve(b);
        const auto x = shifted_forward_solve(h, 5.0, to_std(b));
        for (Eigen::Index i = 0; i < 30; ++i)
            CHECK(std::abs(x[static_cast<std::size_t>(i)] - ref(i)) <= 1e-12 * ref.cwiseAbs().maxCoeff());
    }
    SUBCASE("fine spatial shift against the dense solve") {
        const double hx = M_PI / 1024.0;
        const double c = 2.0 / (hx * hx);
        for (std::size_t leaf : {4u, 32u}) {
            const auto mesh = make_graded_mesh(1.0, 256, delta);
            const auto h = HMatrix::build(mesh, delta, {20, leaf});
            Eigen::MatrixXd a = oracle::dense_r(mesh, delta);
            a.diagonal().array() += c;
            const Eigen::VectorXd b = random_vector(256, 8);
            const Eigen::VectorXd ref = a.triangularView<Eigen::Lower>().solve(b);
            const auto x = shifted_forward_solve(h, c, to_std(b));
            double err = 0.0;
            for (Eigen::Index i = 0; i < 256; ++i)
                err = std::max(err, std::abs(x[static_cast<std::size_t>(i)] - ref(i)));
            CHECK(err <= 1e-6 * ref.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("solve is consistent with the product") {
        for (double shift : {0.0, 1.0, 4.0e5}) {
            const auto h = HMatrix::build(make_graded_mesh(1.0, 400, delta), delta, {15, 8});
            const Eigen::VectorXd b = random_vector(400, 9);
            const auto x = shifted_forward_solve(h, shift, to_std(b));
            const auto hx = hmatvec(h, x);
            double err = 0.0;
            for (std::size_t i = 0; i < 400; ++i)
                err = std::max(err, std::abs(hx[i] + shift * x[i] - b(static_cast<Eigen::Index>(i))));
            CHECK(err <= 1e-10 * b.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("negative shift is rejected") {
        const auto h = HMatrix::build(make_uniform_mesh(1.0, 8), delta);
        CHECK_THROWS_AS(shifted_forward_solve(h, -1.0, std::vector<double>(8, 1.0)), std::invalid_argument);
    }
}

TEST_CASE("storage accounting") {
    const auto mesh = make_graded_mesh(1.0, 1024, 0.6);
    const auto h = HMatrix::build(mesh, 0.6, {20, 32});
    std::size_t dense = 0, lowrank = 0;
    h.for_each_leaf([&](const HNode& node) {
        const auto& b = node.block;
        if (const auto* lr = std::get_if<LowRankBlock>(&node.content)) {
            CHECK(lr->a.cols() == 20);
            lowrank += 20 * (b.rows() + b.cols());
        } else if (const auto* d = std::get_if<DenseBlock>(&node.content)) {
            dense += d->diagonal ? b.rows() * (b.rows() + 1) / 2 : b.rows() * b.cols();
        }
    });
    const auto s = storage_report(h);
    CHECK(s.lowrank_scalars == lowrank);
    CHECK(s.dense_scalars == dense);
    CHECK(s.dense_equivalent_scalars == 1024 * 1025 / 2);
    CHECK(s.compressed_scalars() < s.dense_equivalent_scalars);
    CHECK(s.bytes_compressed() == 8 * s.compressed_scalars());
}

TEST_CASE("tree dump") {
    const auto h = HMatrix::build(make_uniform_mesh(1.0, 64), 0.5, {7, 8});
    std::ostringstream os;
    h.dump(os);
    const std::string text = os.str();
    CHECK(text.rfind("Quad [1,64]x[1,64]", 0) == 0);
    CHECK(text.find("LowRank") != std::string::npos);
    CHECK(text.find("rank=7") != std::string::npos);
    CHECK(text.find("  Zero [1,32]x[33,64]") != std::string::npos);
}

TEST_CASE("build rejects bad options") {
    const auto mesh = make_uniform_mesh(1.0, 16);
    CHECK_THROWS_AS(HMatrix::build(mesh, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(HMatrix::build(mesh, 0.5, {0, 8}), std::invalid_argument);
    CHECK_THROWS_AS(HMatrix::build(mesh, 0.5, {5, 1}), std::invalid_argument);
}
