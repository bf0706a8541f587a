#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracwrmg/mesh.hpp"

namespace fracwrmg {

class SpaceTimeField;

/// L1 weights d(m,k), 1 <= k <= m <= M, of the Caputo derivative on a
/// (possibly graded) mesh:
///
///   d(m,1) = tau_m^-delta / Gamma(2-delta)
///   d(m,k) = [(t_m - t_{m-k})^{1-delta} - (t_m - t_{m-k+1})^{1-delta}]
///            / (Gamma(2-delta) tau_{m-k+1}),   k = 2..m
///
/// with tau_j = t_j - t_{j-1}. The difference of powers is evaluated as
/// -a^p expm1(p log1p(-tau/a)), which keeps full relative accuracy when
/// t_m is far from the step.
class L1Coefficients {
public:
    L1Coefficients(TemporalMesh mesh, double delta);

    double operator()(std::size_t m, std::size_t k) const;

    const TemporalMesh& mesh() const { return mesh_; }
    double delta() const { return delta_; }
    std::size_t steps() const { return mesh_.steps(); }

    /// R[m][j] = d(m, m-j+1) - d(m, m-j) for 1 <= j <= m, zero above the diagonal.
    double r_entry(std::size_t m, std::size_t j) const;

private:
    double unchecked(std::size_t m, std::size_t k) const;

    TemporalMesh mesh_;
    double delta_;
    double inv_gamma_2md_;
};

double d_coeff(const TemporalMesh& mesh, double delta, std::size_t m, std::size_t k);

/// Second difference of s -> (a - s)^p across a hat function with steps
/// el*a to the left and er*a to the right of its node, divided by a^(p-1):
///
///   ((1 + el)^p - 1) / el - (1 - (1 - er)^p) / er
///
/// Requires 0 < er <= 1. For small steps the two quotients nearly cancel, so
/// the binomial series is summed instead.
double hat_difference(double el, double er, double p);

/// Lower-triangular M x M matrix of the discrete Caputo operator acting on
/// u_1..u_M (zero initial value). Packed row storage, 1-based accessors.
class TimeOperatorDense {
public:
    explicit TimeOperatorDense(std::size_t steps);

    std::size_t size() const { return steps_; }
    double operator()(std::size_t m, std::size_t j) const;
    double& at(std::size_t m, std::size_t j);
    std::span<const double> row(std::size_t m) const;

    std::vector<double> apply(std::span<const double> u) const;

    /// Writes "row,col,value" lines for every stored entry.
    void write_csv(std::ostream& out) const;

private:
    static std::size_t offset(std::size_t m) { return m * (m - 1) / 2; }

    std::size_t steps_;
    std::vector<double> packed_;
};

TimeOperatorDense assemble_dense_R(const TemporalMesh& mesh, double delta);

std::vector<double> apply_caputo_dense(const TimeOperatorDense& r, std::span<const double> u);

/// Right-hand side contribution of the initial value: d(m,m) g(x_n) at
/// every (n, m). g holds one value per spatial unknown.
SpaceTimeField initial_lift(const TemporalMesh& mesh, double delta, std::span<const double> g);

}  // namespace fracwrmg
