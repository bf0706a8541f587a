#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "fracwrmg/field.hpp"
#include "fracwrmg/hmatrix.hpp"
#include "fracwrmg/mesh.hpp"

namespace fracwrmg {

/// Space-time operator of one level: H-matrix in time plus the second-order
/// Laplacian stencil in space, (R ⊗ I + I ⊗ A_h).
class LevelOperator {
public:
    LevelOperator(SpatialGrid grid, std::shared_ptr<const HMatrix> time);

    const SpatialGrid& grid() const { return grid_; }
    const HMatrix& time() const { return *time_; }
    std::shared_ptr<const HMatrix> time_ptr() const { return time_; }
    std::size_t points() const { return grid_.points(); }
    std::size_t steps() const { return time_->size(); }

    /// Stencil diagonal 2/h^2 (1D) or 4/h^2 (2D).
    double diagonal() const { return grid_.stencil_diagonal(); }
    /// Off-diagonal weight 1/h^2 of each neighbour.
    double coupling() const { return 1.0 / (grid_.h() * grid_.h()); }

    /// Interior neighbours of spatial point p (at most 4).
    std::size_t neighbours(std::size_t p, std::array<std::size_t, 4>& out) const;

    /// Points of one colour: red (index sum odd) or black (index sum even).
    const std::vector<std::size_t>& colour(int c) const { return colours_[static_cast<std::size_t>(c)]; }

    /// Dense A_h, for direct solves on small grids.
    Eigen::MatrixXd dense_laplacian() const;

private:
    SpatialGrid grid_;
    std::shared_ptr<const HMatrix> time_;
    std::array<std::vector<std::size_t>, 2> colours_;
};

enum class InitialGuess { Zero, Random };

struct CycleConfig {
    int pre_smooth = 0;
    int post_smooth = 1;
    /// 1 = V-cycle, 2 = W-cycle.
    int gamma = 1;
    /// Interior points per axis on the coarsest level.
    std::size_t coarsest_n = 1;
    double tol = 1e-10;
    int max_iter = 100;
    InitialGuess initial_guess = InitialGuess::Random;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    /// Max-norm residual before the first cycle and after every cycle.
    std::vector<double> residual_norms;
    /// (r_final / r_0)^(1/iterations).
    double convergence_factor = 0.0;
    double seconds = 0.0;
};

SpaceTimeField residual(const LevelOperator& op, const SpaceTimeField& u, const SpaceTimeField& f);

/// One red-black zebra-in-time step: every line of the red points, then every
/// line of the black points, is solved exactly with the H-matrix forward
/// substitution using the latest neighbour values.
void smooth(const LevelOperator& op, SpaceTimeField& u, const SpaceTimeField& f);

/// Full weighting per time slice: (1/4, 1/2, 1/4) in 1D, the 9-point
/// tensor stencil in 2D.
SpaceTimeField restrict_full_weighting(const SpatialGrid& fine, const SpaceTimeField& r);

/// Linear (1D) or bilinear (2D) interpolation per time slice from the coarse
/// grid of `fine`.
SpaceTimeField prolong_linear(const SpatialGrid& fine, const SpaceTimeField& e);

/// u += prolong(e).
void prolong_add(const SpatialGrid& fine, const SpaceTimeField& e, SpaceTimeField& u);

/// Direct solve by time stepping through the H-matrix block structure.
SpaceTimeField coarsest_solve(const LevelOperator& op, const SpaceTimeField& f);

/// Multigrid waveform relaxation with coarsening in space only. All levels
/// share the temporal H-matrix.
class WaveformMultigrid {
public:
    WaveformMultigrid(SpatialGrid fine, std::shared_ptr<const HMatrix> time, CycleConfig config = {});

    std::size_t levels() const { return levels_.size(); }
    const LevelOperator& level(std::size_t l) const { return levels_[l]; }
    const CycleConfig& config() const { return config_; }

    /// One cycle on level l (0 = finest). `known_residual`, if given, must be
    /// f - A u and replaces the defect computation when there is no
    /// pre-smoothing.
    void cycle(std::size_t l, SpaceTimeField& u, const SpaceTimeField& f,
               const SpaceTimeField* known_residual = nullptr) const;

    SpaceTimeField initial_guess() const;

    /// Iterates cycles until ||r||_inf <= tol ||r_0||_inf or max_iter.
    std::pair<SpaceTimeField, SolveReport> solve(const SpaceTimeField& f) const;
    std::pair<SpaceTimeField, SolveReport> solve(const SpaceTimeField& f, SpaceTimeField u) const;

private:
    CycleConfig config_;
    std::vector<LevelOperator> levels_;
};

}  // namespace fracwrmg
