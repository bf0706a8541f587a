#include "fracwrmg/multigrid.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fracwrmg {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Runs body(first, count) over contiguous column chunks, one per thread.
template <class Body>
void for_column_chunks(std::size_t columns, Body&& body) {
    const auto chunks = static_cast<std::ptrdiff_t>(
        std::max<std::size_t>(1, std::min<std::size_t>(columns, static_cast<std::size_t>(thread_count()))));
    const std::size_t width = (columns + static_cast<std::size_t>(chunks) - 1) / static_cast<std::size_t>(chunks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
        const std::size_t first = static_cast<std::size_t>(c) * width;
        if (first < columns)
            body(first, std::min(width, columns - first));
    }
}

void check_shapes(const LevelOperator& op, const SpaceTimeField& u, const char* what) {
    if (u.points() != op.points() || u.steps() != op.steps())
        throw std::invalid_argument(std::string(what) + ": field shape " + std::to_string(u.points()) + "x" +
                                    std::to_string(u.steps()) + " does not match level " +
                                    std::to_string(op.points()) + "x" + std::to_string(op.steps()));
}

std::size_t coarse_count(const SpatialGrid& fine) {
    if (!can_coarsen(fine))
        throw std::invalid_argument("grid with N = " + std::to_string(fine.n) + " cannot be coarsened");
    return (fine.n + 1) / 2 - 1;
}

}  // namespace

LevelOperator::LevelOperator(SpatialGrid grid, std::shared_ptr<const HMatrix> time)
    : grid_(grid), time_(std::move(time)) {
    if (!time_)
        throw std::invalid_argument("level operator needs a temporal H-matrix");
    const std::size_t n = grid_.n;
    if (grid_.dim == 1) {
        for (std::size_t i = 1; i <= n; ++i)
            colours_[i % 2 == 1 ? 0 : 1].push_back(i - 1);
    } else {
        for (std::size_t j = 1; j <= n; ++j)
            for (std::size_t i = 1; i <= n; ++i)
                colours_[(i + j) % 2 == 1 ? 0 : 1].push_back((i - 1) + (j - 1) * n);
    }
}

std::size_t LevelOperator::neighbours(std::size_t p, std::array<std::size_t, 4>& out) const {
    const std::size_t n = grid_.n;
    std::size_t count = 0;
    if (grid_.dim == 1) {
        if (p > 0)
            out[count++] = p - 1;
        if (p + 1 < n)
            out[count++] = p + 1;
        return count;
    }
    const std::size_t i = p % n;
    const std::size_t j = p / n;
    if (i > 0)
        out[count++] = p - 1;
    if (i + 1 < n)
        out[count++] = p + 1;
    if (j > 0)
        out[count++] = p - n;
    if (j + 1 < n)
        out[count++] = p + n;
    return count;
}

Eigen::MatrixXd LevelOperator::dense_laplacian() const {
    const std::size_t p = points();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(idx(p), idx(p));
    std::array<std::size_t, 4> nb{};
    for (std::size_t q = 0; q < p; ++q) {
        a(idx(q), idx(q)) = diagonal();
        const std::size_t count = neighbours(q, nb);
        for (std::size_t k = 0; k < count; ++k)
            a(idx(q), idx(nb[k])) = -coupling();
    }
    return a;
}

void CycleConfig::validate() const {
    if (pre_smooth < 0 || post_smooth < 0 || pre_smooth + post_smooth < 1)
        throw std::invalid_argument("need pre_smooth, post_smooth >= 0 with at least one smoothing step");
    if (gamma != 1 && gamma != 2)
        throw std::invalid_argument("cycle index gamma must be 1 (V) or 2 (W)");
    if (coarsest_n == 0 || !std::has_single_bit(coarsest_n + 1))
        throw std::invalid_argument("coarsest grid size must satisfy N + 1 = 2^l");
    if (!(tol > 0.0 && tol < 1.0))
        throw std::invalid_argument("tolerance must lie in (0,1)");
    if (max_iter < 1)
        throw std::invalid_argument("max_iter must be positive");
}

SpaceTimeField residual(const LevelOperator& op, const SpaceTimeField& u, const SpaceTimeField& f) {
    check_shapes(op, u, "residual");
    check_shapes(op, f, "residual");
    SpaceTimeField r = f;
    const Eigen::MatrixXd& um = u.matrix();
    Eigen::MatrixXd& rm = r.matrix();
    const double diag = op.diagonal();
    const double off = op.coupling();
    for_column_chunks(op.points(), [&](std::size_t first, std::size_t count) {
        op.time().multiply_add(um.middleCols(idx(first), idx(count)), rm.middleCols(idx(first), idx(count)), -1.0);
        std::array<std::size_t, 4> nb{};
        for (std::size_t p = first; p < first + count; ++p) {
            auto col = rm.col(idx(p));
            col -= diag * um.col(idx(p));
            const std::size_t k = op.neighbours(p, nb);
            for (std::size_t q = 0; q < k; ++q)
                col += off * um.col(idx(nb[q]));
        }
    });
    return r;
}

void smooth(const LevelOperator& op, SpaceTimeField& u, const SpaceTimeField& f) {
    check_shapes(op, u, "smooth");
    check_shapes(op, f, "smooth");
    Eigen::MatrixXd& um = u.matrix();
    const Eigen::MatrixXd& fm = f.matrix();
    const double diag = op.diagonal();
    const double off = op.coupling();
    for (int c = 0; c < 2; ++c) {
        const auto& points = op.colour(c);
        if (points.empty())
            continue;
        Eigen::MatrixXd rhs(um.rows(), idx(points.size()));
        for_column_chunks(points.size(), [&](std::size_t first, std::size_t count) {
            std::array<std::size_t, 4> nb{};
            for (std::size_t q = first; q < first + count; ++q) {
                const std::size_t p = points[q];
                auto col = rhs.col(idx(q));
                col = fm.col(idx(p));
                const std::size_t k = op.neighbours(p, nb);
                for (std::size_t s = 0; s < k; ++s)
                    col += off * um.col(idx(nb[s]));
            }
            op.time().shifted_forward_solve_inplace(diag, rhs.middleCols(idx(first), idx(count)));
            for (std::size_t q = first; q < first + count; ++q)
                um.col(idx(points[q])) = rhs.col(idx(q));
        });
    }
}

SpaceTimeField restrict_full_weighting(const SpatialGrid& fine, const SpaceTimeField& r) {
    const std::size_t nc = coarse_count(fine);
    const std::size_t n = fine.n;
    if (r.points() != fine.points())
        throw std::invalid_argument("restriction: field does not match the fine grid");
    const Eigen::MatrixXd& rm = r.matrix();
    if (fine.dim == 1) {
        SpaceTimeField out(nc, r.steps());
        for (std::size_t c = 1; c <= nc; ++c) {
            const std::size_t i = 2 * c - 1;  // zero-based fine index of x_{2c}
            out.matrix().col(idx(c - 1)) = 0.25 * rm.col(idx(i - 1)) + 0.5 * rm.col(idx(i)) + 0.25 * rm.col(idx(i + 1));
        }
        return out;
    }
    SpaceTimeField out(nc * nc, r.steps());
    static constexpr double w[3] = {0.25, 0.5, 0.25};
    for (std::size_t cj = 1; cj <= nc; ++cj) {
        for (std::size_t ci = 1; ci <= nc; ++ci) {
            auto col = out.matrix().col(idx((ci - 1) + (cj - 1) * nc));
            // zero-based fine indices 2c-2, 2c-1, 2c around the coincident point
            for (std::size_t b = 0; b < 3; ++b)
                for (std::size_t a = 0; a < 3; ++a) {
                    const std::size_t fi = 2 * ci - 2 + a;
                    const std::size_t fj = 2 * cj - 2 + b;
                    col += (w[a] * w[b]) * rm.col(idx(fi + fj * n));
                }
        }
    }
    return out;
}

void prolong_add(const SpatialGrid& fine, const SpaceTimeField& e, SpaceTimeField& u) {
    const std::size_t nc = coarse_count(fine);
    const std::size_t n = fine.n;
    const std::size_t coarse_points = fine.dim == 1 ? nc : nc * nc;
    if (e.points() != coarse_points || u.points() != fine.points() || e.steps() != u.steps())
        throw std::invalid_argument("prolongation: field shapes do not match the grids");
    const Eigen::MatrixXd& em = e.matrix();
    Eigen::MatrixXd& um = u.matrix();
    // fine index i (1..n) -> list of (coarse index 1..nc, weight)
    auto stencil = [nc](std::size_t i, std::array<std::pair<std::size_t, double>, 2>& out) {
        if (i % 2 == 0) {
            out[0] = {i / 2, 1.0};
            return std::size_t{1};
        }
        std::size_t k = 0;
        if (i / 2 >= 1)
            out[k++] = {i / 2, 0.5};
        if (i / 2 + 1 <= nc)
            out[k++] = {i / 2 + 1, 0.5};
        return k;
    };
    std::array<std::pair<std::size_t, double>, 2> sx{}, sy{};
    if (fine.dim == 1) {
        for (std::size_t i = 1; i <= n; ++i) {
            const std::size_t kx = stencil(i, sx);
            for (std::size_t a = 0; a < kx; ++a)
                um.col(idx(i - 1)) += sx[a].second * em.col(idx(sx[a].first - 1));
        }
        return;
    }
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t ky = stencil(j, sy);
        for (std::size_t i = 1; i <= n; ++i) {
            const std::size_t kx = stencil(i, sx);
            auto col = um.col(idx((i - 1) + (j - 1) * n));
            for (std::size_t b = 0; b < ky; ++b)
                for (std::size_t a = 0; a < kx; ++a)
                    col += (sx[a].second * sy[b].second) *
                           em.col(idx((sx[a].first - 1) + (sy[b].first - 1) * nc));
        }
    }
}

SpaceTimeField prolong_linear(const SpatialGrid& fine, const SpaceTimeField& e) {
    SpaceTimeField u(fine.points(), e.steps());
    prolong_add(fine, e, u);
    return u;
}

SpaceTimeField coarsest_solve(const LevelOperator& op, const SpaceTimeField& f) {
    check_shapes(op, f, "coarsest solve");
    SpaceTimeField u = f;
    if (op.points() == 1) {
        op.time().shifted_forward_solve_inplace(op.diagonal(), u.matrix());
        return u;
    }
    // time stepping inside each diagonal leaf; A_h = Q diag(lambda) Q^T
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.dense_laplacian());
    const Eigen::MatrixXd& q = eig.eigenvectors();
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    op.time().forward_solve(u.matrix(), [&](const Eigen::MatrixXd& block, std::size_t, Eigen::Ref<Eigen::MatrixXd> x) {
        for (Eigen::Index i = 0; i < block.rows(); ++i) {
            Eigen::RowVectorXd rhs = x.row(i);
            if (i > 0)
                rhs.noalias() -= block.row(i).head(i) * x.topRows(i);
            Eigen::VectorXd modal = q.transpose() * rhs.transpose();
            modal.array() /= (lambda.array() + block(i, i));
            x.row(i) = (q * modal).transpose();
        }
    });
    return u;
}

WaveformMultigrid::WaveformMultigrid(SpatialGrid fine, std::shared_ptr<const HMatrix> time, CycleConfig config)
    : config_(config) {
    config_.validate();
    if (config_.coarsest_n > fine.n)
        throw std::invalid_argument("coarsest grid is finer than the fine grid");
    SpatialGrid g = fine;
    levels_.emplace_back(g, time);
    while (g.n > config_.coarsest_n && can_coarsen(g)) {
        g = coarsen_space(g);
        levels_.emplace_back(g, time);
    }
}

void WaveformMultigrid::cycle(std::size_t l, SpaceTimeField& u, const SpaceTimeField& f,
                              const SpaceTimeField* known_residual) const {
    const LevelOperator& op = levels_[l];
    if (l + 1 == levels_.size()) {
        u = coarsest_solve(op, f);
        return;
    }
    for (int s = 0; s < config_.pre_smooth; ++s)
        smooth(op, u, f);
    const SpaceTimeField r =
        (config_.pre_smooth == 0 && known_residual != nullptr) ? *known_residual : residual(op, u, f);
    const SpaceTimeField rc = restrict_full_weighting(op.grid(), r);
    SpaceTimeField ec(rc.points(), rc.steps());
    for (int g = 0; g < config_.gamma; ++g)
        cycle(l + 1, ec, rc);
    prolong_add(op.grid(), ec, u);
    for (int s = 0; s < config_.post_smooth; ++s)
        smooth(op, u, f);
}

SpaceTimeField WaveformMultigrid::initial_guess() const {
    const LevelOperator& op = levels_.front();
    SpaceTimeField u(op.points(), op.steps());
    if (config_.initial_guess == InitialGuess::Random) {
        std::mt19937_64 rng(config_.seed);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (std::size_t p = 0; p < u.points(); ++p)
            for (std::size_t m = 0; m < u.steps(); ++m)
                u(p, m) = dist(rng);
    }
    return u;
}

std::pair<SpaceTimeField, SolveReport> WaveformMultigrid::solve(const SpaceTimeField& f) const {
    return solve(f, initial_guess());
}

std::pair<SpaceTimeField, SolveReport> WaveformMultigrid::solve(const SpaceTimeField& f, SpaceTimeField u) const {
    const auto start = std::chrono::steady_clock::now();
    const LevelOperator& op = levels_.front();
    check_shapes(op, f, "solve");
    check_shapes(op, u, "solve");

    SolveReport report;
    SpaceTimeField r = residual(op, u, f);
    const double r0 = r.max_abs();
    report.residual_norms.push_back(r0);
    report.converged = r0 == 0.0;
    while (!report.converged && report.iterations < config_.max_iter) {
        cycle(0, u, f, &r);
        r = residual(op, u, f);
        ++report.iterations;
        const double rn = r.max_abs();
        report.residual_norms.push_back(rn);
        report.converged = rn <= config_.tol * r0;
    }
    if (report.iterations > 0 && r0 > 0.0)
        report.convergence_factor =
            std::pow(report.residual_norms.back() / r0, 1.0 / static_cast<double>(report.iterations));
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(u), std::move(report)};
}

}  // namespace fracwrmg
