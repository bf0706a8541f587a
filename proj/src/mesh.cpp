#include "fracwrmg/mesh.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fracwrmg {

namespace {

void check_time_args(double final_time, std::size_t steps) {
    if (!(final_time > 0.0) || !std::isfinite(final_time))
        throw std::invalid_argument("final time must be positive, got " + std::to_string(final_time));
    if (steps == 0)
        throw std::invalid_argument("number of time steps must be at least 1");
}

}  // namespace

TemporalMesh::TemporalMesh(double final_time, double grading, std::vector<double> points)
    : final_time_(final_time), grading_(grading), points_(std::move(points)) {
    steps_.resize(points_.size() - 1);
    for (std::size_t j = 1; j < points_.size(); ++j) {
        steps_[j - 1] = points_[j] - points_[j - 1];
        if (!(steps_[j - 1] > 0.0))
            throw std::logic_error("temporal mesh is not strictly increasing at index " + std::to_string(j));
    }
}

TemporalMesh make_graded_mesh_with_exponent(double final_time, std::size_t steps, double exponent) {
    check_time_args(final_time, steps);
    if (!(exponent >= 1.0))
        throw std::invalid_argument("grading exponent must be >= 1");
    std::vector<double> t(steps + 1);
    t[0] = 0.0;
    t[steps] = final_time;
    // exp/log form keeps tiny early points accurate for large exponents
    const double log_steps = std::log(static_cast<double>(steps));
    for (std::size_t m = 1; m < steps; ++m)
        t[m] = final_time * std::exp(exponent * (std::log(static_cast<double>(m)) - log_steps));
    return TemporalMesh(final_time, exponent, std::move(t));
}

TemporalMesh make_graded_mesh(double final_time, std::size_t steps, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("fractional order must lie in (0,1), got " + std::to_string(delta));
    return make_graded_mesh_with_exponent(final_time, steps, (2.0 - delta) / delta);
}

TemporalMesh make_uniform_mesh(double final_time, std::size_t steps) {
    check_time_args(final_time, steps);
    std::vector<double> t(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m)
        t[m] = final_time * static_cast<double>(m) / static_cast<double>(steps);
    t[steps] = final_time;
    return TemporalMesh(final_time, 1.0, std::move(t));
}

SpatialGrid make_spatial_grid(int dim, double length, std::size_t n) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("spatial dimension must be 1 or 2");
    if (!(length > 0.0))
        throw std::invalid_argument("domain length must be positive");
    if (n == 0 || !std::has_single_bit(n + 1))
        throw std::invalid_argument("N + 1 must be a power of two, got N = " + std::to_string(n));
    return SpatialGrid{dim, length, n};
}

bool can_coarsen(const SpatialGrid& grid) { return grid.n >= 3 && (grid.n + 1) % 2 == 0; }

SpatialGrid coarsen_space(const SpatialGrid& grid) {
    if (!can_coarsen(grid))
        throw std::invalid_argument("spatial grid is already coarsest (N = " + std::to_string(grid.n) + ")");
    return SpatialGrid{grid.dim, grid.length, (grid.n + 1) / 2 - 1};
}

}  // namespace fracwrmg
