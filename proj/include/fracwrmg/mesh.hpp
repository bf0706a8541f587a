#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracwrmg {

/// Temporal mesh 0 = t_0 < t_1 < ... < t_M = T.
///
/// Step j (1 <= j <= M) is t_j - t_{j-1}. Immutable after construction.
class TemporalMesh {
public:
    double final_time() const { return final_time_; }
    std::size_t steps() const { return points_.size() - 1; }
    /// Grading exponent r; 1 for uniform meshes.
    double grading() const { return grading_; }

    std::span<const double> points() const { return points_; }
    double operator[](std::size_t m) const { return points_[m]; }
    double step(std::size_t j) const { return steps_[j - 1]; }

private:
    TemporalMesh(double final_time, double grading, std::vector<double> points);

    friend TemporalMesh make_graded_mesh(double, std::size_t, double);
    friend TemporalMesh make_graded_mesh_with_exponent(double, std::size_t, double);
    friend TemporalMesh make_uniform_mesh(double, std::size_t);

    double final_time_;
    double grading_;
    std::vector<double> points_;
    std::vector<double> steps_;
};

/// Graded mesh t_m = T (m/M)^r with r = (2 - delta) / delta.
TemporalMesh make_graded_mesh(double final_time, std::size_t steps, double delta);

/// Graded mesh with an explicit exponent r >= 1.
TemporalMesh make_graded_mesh_with_exponent(double final_time, std::size_t steps, double exponent);

TemporalMesh make_uniform_mesh(double final_time, std::size_t steps);

/// Uniform spatial grid on [0, L]^dim with N interior points per axis and
/// homogeneous Dirichlet boundaries. N + 1 must be a power of two.
struct SpatialGrid {
    int dim = 1;
    double length = 0.0;
    std::size_t n = 0;

    double h() const { return length / static_cast<double>(n + 1); }
    /// Number of interior unknowns, N or N*N.
    std::size_t points() const { return dim == 1 ? n : n * n; }
    /// Diagonal of the second-order stencil: 2/h^2 (1D) or 4/h^2 (2D).
    double stencil_diagonal() const { return 2.0 * dim / (h() * h()); }
    /// Coordinate of interior index i in 1..N along one axis.
    double coordinate(std::size_t i) const { return static_cast<double>(i) * h(); }

    bool operator==(const SpatialGrid&) const = default;
};

SpatialGrid make_spatial_grid(int dim, double length, std::size_t n);

bool can_coarsen(const SpatialGrid& grid);

/// Halves the number of subdivisions per axis. Throws if the grid is
/// already at one interior point per axis.
SpatialGrid coarsen_space(const SpatialGrid& grid);

}  // namespace fracwrmg
