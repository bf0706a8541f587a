#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "fracwrmg/exact.hpp"
#include "fracwrmg/field.hpp"
#include "fracwrmg/hmatrix.hpp"
#include "fracwrmg/mesh.hpp"

namespace fracwrmg {

enum class ProblemKind { Heat1D, Heat2D };
enum class MeshKind { Graded, Uniform };

ProblemKind parse_problem_kind(const std::string& name);
MeshKind parse_mesh_kind(const std::string& name);
std::string to_string(ProblemKind kind);
std::string to_string(MeshKind kind);

/// The two benchmark problems on [0, pi]^d x [0, 1]:
///  heat1d: f = 0, g = sin x, u = E_delta(-t^delta) sin x
///  heat2d: manufactured u = (t^3 + t^delta) sin x sin y, g = 0
struct ProblemSpec {
    ProblemKind kind = ProblemKind::Heat1D;
    double delta = 0.5;
    /// Interior points per axis, N + 1 a power of two.
    std::size_t n = 127;
    std::size_t steps = 128;
    MeshKind mesh = MeshKind::Graded;
};

struct Problem {
    ProblemSpec spec;
    SpatialGrid grid;
    TemporalMesh mesh;
    /// f(x_n, t_m) plus the lift d(m,m) g(x_n) of the initial value.
    SpaceTimeField rhs;
};

Problem make_problem(const ProblemSpec& spec);

/// Exact solution at every interior grid point and t_1..t_M.
SpaceTimeField sample_exact(const Problem& problem);

/// max |u - exact| over all entries.
double max_error(const SpaceTimeField& u, const SpaceTimeField& exact);

}  // namespace fracwrmg
