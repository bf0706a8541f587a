#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fracwrmg/mesh.hpp"

namespace fracwrmg {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double diam() const { return hi - lo; }
};

/// diam(target) <= dist(source, target) for a source interval lying
/// strictly to the left of the target. Any other configuration is not
/// admissible.
bool admissible(Interval target, Interval source);

/// Rows m_lo..m_hi and columns j_lo..j_hi of the temporal operator, one based
/// and inclusive.
struct BlockIndex {
    std::size_t row_lo = 1;
    std::size_t row_hi = 0;
    std::size_t col_lo = 1;
    std::size_t col_hi = 0;

    std::size_t rows() const { return row_hi + 1 - row_lo; }
    std::size_t cols() const { return col_hi + 1 - col_lo; }
    bool above_diagonal() const { return col_lo > row_hi; }
    bool below_diagonal() const { return col_hi < row_lo; }

    bool operator==(const BlockIndex&) const = default;
};

/// Time interval [t_{m_lo-1}, t_{m_hi}] covered by the rows of a block.
Interval row_interval(const TemporalMesh& mesh, const BlockIndex& block);

/// Union of the hat-function supports of the block columns,
/// [t_{j_lo-1}, t_{min(j_hi+1, M)}].
Interval col_interval(const TemporalMesh& mesh, const BlockIndex& block);

bool admissible(const TemporalMesh& mesh, const BlockIndex& block);

/// Rank-k factors with R|block ~ A B^T from the truncated Taylor expansion of
/// (t - s)^-delta about the midpoint t_0 of the row interval.
///
/// Column nu of A and B is rescaled by rho^-nu and rho^nu respectively,
/// rho = half width of the row interval, so neither factor over- or
/// underflows on strongly graded meshes. The product is unchanged.
struct LowRankFactors {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
};

LowRankFactors lowrank_factors(const TemporalMesh& mesh, double delta, const BlockIndex& block,
                               std::size_t rank);

/// Taylor coefficient c_nu = (1/nu!) prod_{l=1..nu} (1 - delta - l).
double taylor_coefficient(double delta, std::size_t nu);

enum class NodeKind { Zero, Dense, LowRank, Quad };

const char* to_string(NodeKind kind);

struct HNode;

struct ZeroBlock {};
struct DenseBlock {
    Eigen::MatrixXd values;
    bool diagonal = false;
};
struct LowRankBlock {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
};
struct QuadBlock {
    /// upper-left, upper-right, lower-left, lower-right
    std::array<std::unique_ptr<HNode>, 4> children;
};

struct HNode {
    BlockIndex block;
    std::variant<ZeroBlock, DenseBlock, LowRankBlock, QuadBlock> content;

    NodeKind kind() const { return static_cast<NodeKind>(content.index()); }
};

struct HOptions {
    std::size_t rank = 20;
    std::size_t leaf_size = 32;
};

struct StorageReport {
    std::size_t dense_scalars = 0;
    std::size_t lowrank_scalars = 0;
    std::size_t dense_equivalent_scalars = 0;
    std::size_t zero_leaves = 0;
    std::size_t dense_leaves = 0;
    std::size_t lowrank_leaves = 0;

    std::size_t compressed_scalars() const { return dense_scalars + lowrank_scalars; }
    std::size_t bytes_compressed() const { return compressed_scalars() * sizeof(double); }
    std::size_t bytes_dense_equivalent() const { return dense_equivalent_scalars * sizeof(double); }
};

/// Hierarchical-matrix representation of the lower-triangular L1 operator.
class HMatrix {
public:
    /// Solves the diagonal leaf system in place. Arguments are the exact dense
    /// diagonal block, the one-based index of its first row, and the rows of
    /// the right-hand side belonging to the block.
    using DiagonalSolver =
        std::function<void(const Eigen::MatrixXd& block, std::size_t first_row, Eigen::Ref<Eigen::MatrixXd> x)>;

    static HMatrix build(const TemporalMesh& mesh, double delta, HOptions options = {});

    std::size_t size() const { return size_; }
    std::size_t rank() const { return options_.rank; }
    std::size_t leaf_size() const { return options_.leaf_size; }
    double delta() const { return delta_; }
    const HNode& root() const { return *root_; }

    /// y += alpha * H x for every column of x.
    void multiply_add(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y,
                      double alpha = 1.0) const;

    std::vector<double> matvec(std::span<const double> x) const;

    /// Overwrites every column of x with the solution of (H + shift I) x = b.
    void shifted_forward_solve_inplace(double shift, Eigen::Ref<Eigen::MatrixXd> x) const;

    std::vector<double> shifted_forward_solve(double shift, std::span<const double> b) const;

    /// Block forward substitution with a caller supplied diagonal solver.
    void forward_solve(Eigen::Ref<Eigen::MatrixXd> x, const DiagonalSolver& solver) const;

    Eigen::MatrixXd densify() const;
    StorageReport storage() const;

    void for_each_leaf(const std::function<void(const HNode&)>& visit) const;

    /// One line per node: depth-indented kind, index ranges and rank.
    void dump(std::ostream& out) const;

private:
    HMatrix() = default;

    std::size_t size_ = 0;
    double delta_ = 0.0;
    HOptions options_;
    std::shared_ptr<const HNode> root_;
};

inline HMatrix build_hmatrix(const TemporalMesh& mesh, double delta, HOptions options = {}) {
    return HMatrix::build(mesh, delta, options);
}

std::vector<double> hmatvec(const HMatrix& h, std::span<const double> x);

std::vector<double> shifted_forward_solve(const HMatrix& h, double shift, std::span<const double> b);

inline StorageReport storage_report(const HMatrix& h) { return h.storage(); }

}  // namespace fracwrmg
