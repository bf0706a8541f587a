#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fracwrmg/field.hpp"
#include "fracwrmg/mesh.hpp"

namespace fracwrmg {

struct MittagLefflerValue {
    double value = 0.0;
    int terms = 0;
    /// False if the 500-term cap was reached before the tail became negligible.
    bool converged = false;
};

/// Largest |z| accepted by mittag_leffler.
inline constexpr double kMittagLefflerMaxAbsArgument = 1.0;

/// E_delta(z) = sum_k z^k / Gamma(delta k + 1) for 0 < delta <= 1 and
/// z in [-1, 0]. Summation stops once |term| < 1e-16 |sum| (500 terms max).
MittagLefflerValue mittag_leffler(double delta, double z);

/// u(x, t) = E_delta(-t^delta) sin x, the solution of the 1D test with
/// f = 0 and g(x) = sin x on [0, pi] x [0, 1].
double exact_solution_1d(double x, double t, double delta);

struct ManufacturedValue {
    double u = 0.0;
    double f = 0.0;
};

/// u = (t^3 + t^delta) sin x sin y together with its right-hand side
/// f = 2 (t^3 + t^delta) sin x sin y + (Gamma(delta+1) + 6/Gamma(4-delta) t^{3-delta}) sin x sin y.
ManufacturedValue manufactured_2d(double x, double y, double t, double delta);

/// Exact solution sampled at (x, y, t); y is ignored in 1D.
using ExactSampler = std::function<double(double x, double y, double t)>;

/// max over interior grid points and t_1..t_M of |u_num - u|.
double max_error(const SpaceTimeField& u, const SpatialGrid& grid, const TemporalMesh& mesh,
                 const ExactSampler& exact);

struct ErrorStudy {
    struct Entry {
        std::size_t steps = 0;
        double error = 0.0;
    };
    std::vector<Entry> entries;
};

/// log2(E_M / E_2M) for each consecutive pair.
std::vector<double> observed_orders(const ErrorStudy& study);

}  // namespace fracwrmg
