#include "fracwrmg/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fracwrmg/fracdisc.hpp"

namespace fracwrmg {

ProblemKind parse_problem_kind(const std::string& name) {
    if (name == "heat1d")
        return ProblemKind::Heat1D;
    if (name == "heat2d")
        return ProblemKind::Heat2D;
    throw std::invalid_argument("unknown problem '" + name + "' (expected heat1d or heat2d)");
}

MeshKind parse_mesh_kind(const std::string& name) {
    if (name == "graded")
        return MeshKind::Graded;
    if (name == "uniform")
        return MeshKind::Uniform;
    throw std::invalid_argument("unknown mesh '" + name + "' (expected graded or uniform)");
}

std::string to_string(ProblemKind kind) { return kind == ProblemKind::Heat1D ? "heat1d" : "heat2d"; }
std::string to_string(MeshKind kind) { return kind == MeshKind::Graded ? "graded" : "uniform"; }

namespace {

TemporalMesh make_mesh(const ProblemSpec& spec) {
    return spec.mesh == MeshKind::Graded ? make_graded_mesh(1.0, spec.steps, spec.delta)
                                         : make_uniform_mesh(1.0, spec.steps);
}

}  // namespace

Problem make_problem(const ProblemSpec& spec) {
    if (!(spec.delta > 0.0 && spec.delta < 1.0))
        throw std::invalid_argument("fractional order must lie in (0,1)");
    const int dim = spec.kind == ProblemKind::Heat1D ? 1 : 2;
    const SpatialGrid grid = make_spatial_grid(dim, std::numbers::pi, spec.n);
    TemporalMesh mesh = make_mesh(spec);

    if (spec.kind == ProblemKind::Heat1D) {
        std::vector<double> g(grid.points());
        for (std::size_t i = 0; i < grid.n; ++i)
            g[i] = std::sin(grid.coordinate(i + 1));
        SpaceTimeField rhs = initial_lift(mesh, spec.delta, g);
        return Problem{spec, grid, std::move(mesh), std::move(rhs)};
    }

    SpaceTimeField rhs(grid.points(), mesh.steps());
    for (std::size_t j = 1; j <= grid.n; ++j)
        for (std::size_t i = 1; i <= grid.n; ++i) {
            const std::size_t p = (i - 1) + (j - 1) * grid.n;
            for (std::size_t m = 1; m <= mesh.steps(); ++m)
                rhs(p, m - 1) = manufactured_2d(grid.coordinate(i), grid.coordinate(j), mesh[m], spec.delta).f;
        }
    return Problem{spec, grid, std::move(mesh), std::move(rhs)};
}

SpaceTimeField sample_exact(const Problem& problem) {
    const auto& grid = problem.grid;
    const auto& mesh = problem.mesh;
    const double delta = problem.spec.delta;
    SpaceTimeField u(grid.points(), mesh.steps());
    std::vector<double> amplitude(mesh.steps());
    for (std::size_t m = 1; m <= mesh.steps(); ++m) {
        const double t = mesh[m];
        amplitude[m - 1] = problem.spec.kind == ProblemKind::Heat1D ? mittag_leffler(delta, -std::pow(t, delta)).value
                                                                    : t * t * t + std::pow(t, delta);
    }
    for (std::size_t p = 0; p < grid.points(); ++p) {
        double shape = std::sin(grid.coordinate(p % grid.n + 1));
        if (grid.dim == 2)
            shape *= std::sin(grid.coordinate(p / grid.n + 1));
        for (std::size_t m = 0; m < mesh.steps(); ++m)
            u(p, m) = amplitude[m] * shape;
    }
    return u;
}

double max_error(const SpaceTimeField& u, const SpaceTimeField& exact) {
    if (!u.same_shape(exact))
        throw std::invalid_argument("max_error: shape mismatch");
    return (u.matrix() - exact.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace fracwrmg
