#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace fracwrmg {

/// Space-time grid function u_{n,m} on the interior spatial points and the
/// time levels t_1..t_M (boundary and initial values are eliminated).
///
/// Stored as an M x P column-major matrix: column n is the time line of
/// spatial point n, so line solves and H-matrix products act on contiguous
/// memory. Indices are zero based: (n, m) holds the value at t_{m+1}.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(std::size_t points, std::size_t steps);

    std::size_t points() const { return static_cast<std::size_t>(data_.cols()); }
    std::size_t steps() const { return static_cast<std::size_t>(data_.rows()); }

    double& operator()(std::size_t n, std::size_t m) { return data_(m, n); }
    double operator()(std::size_t n, std::size_t m) const { return data_(m, n); }

    std::span<double> line(std::size_t n) { return {data_.col(n).data(), steps()}; }
    std::span<const double> line(std::size_t n) const { return {data_.col(n).data(), steps()}; }

    Eigen::MatrixXd& matrix() { return data_; }
    const Eigen::MatrixXd& matrix() const { return data_; }

    void set_zero() { data_.setZero(); }
    double max_abs() const;
    bool same_shape(const SpaceTimeField& other) const;

private:
    Eigen::MatrixXd data_;
};

}  // namespace fracwrmg
