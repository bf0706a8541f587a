#include "fracwrmg/hmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fracwrmg/fracdisc.hpp"

namespace fracwrmg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::Index offset(std::size_t one_based) { return static_cast<Eigen::Index>(one_based - 1); }
Eigen::Index extent(std::size_t n) { return static_cast<Eigen::Index>(n); }

// rho^nu times the hat second difference of s -> (center - s)^p, p = 1 - delta - nu,
// for a hat whose node lies at distance a from the centre
double scaled_hat_difference(double a, double tl, double tr, double rho, double delta, std::size_t nu) {
    const double p = 1.0 - delta - static_cast<double>(nu);
    const double scaled_power =
        std::exp((1.0 - delta) * std::log(a) + static_cast<double>(nu) * std::log(rho / a));
    return scaled_power * hat_difference(tl / a, tr / a, p) / a;
}

class Builder {
public:
    Builder(const TemporalMesh& mesh, double delta, HOptions options)
        : mesh_(mesh), delta_(delta), options_(options), coeffs_(mesh, delta) {}

    std::unique_ptr<HNode> build(const BlockIndex& block) const {
        auto node = std::make_unique<HNode>();
        node->block = block;
        if (block.above_diagonal()) {
            node->content = ZeroBlock{};
        } else if (block.below_diagonal() && admissible(mesh_, block)) {
            auto factors = lowrank_factors(mesh_, delta_, block, options_.rank);
            node->content = LowRankBlock{std::move(factors.a), std::move(factors.b)};
        } else if (std::min(block.rows(), block.cols()) <= options_.leaf_size) {
            node->content = dense(block);
        } else {
            const std::size_t row_mid = block.row_lo + (block.rows() - 1) / 2;
            const std::size_t col_mid = block.col_lo + (block.cols() - 1) / 2;
            QuadBlock quad;
            quad.children[0] = build({block.row_lo, row_mid, block.col_lo, col_mid});
            quad.children[1] = build({block.row_lo, row_mid, col_mid + 1, block.col_hi});
            quad.children[2] = build({row_mid + 1, block.row_hi, block.col_lo, col_mid});
            quad.children[3] = build({row_mid + 1, block.row_hi, col_mid + 1, block.col_hi});
            node->content = std::move(quad);
        }
        return node;
    }

private:
    DenseBlock dense(const BlockIndex& block) const {
        DenseBlock leaf;
        leaf.diagonal = !block.below_diagonal();
        leaf.values.resize(extent(block.rows()), extent(block.cols()));
        for (std::size_t i = 0; i < block.rows(); ++i)
            for (std::size_t j = 0; j < block.cols(); ++j)
                leaf.values(extent(i), extent(j)) = coeffs_.r_entry(block.row_lo + i, block.col_lo + j);
        return leaf;
    }

    const TemporalMesh& mesh_;
    double delta_;
    HOptions options_;
    L1Coefficients coeffs_;
};

void multiply_add_node(const HNode& node, const Eigen::Ref<const Eigen::MatrixXd>& x,
                       Eigen::Ref<Eigen::MatrixXd> y, double alpha) {
    const auto& b = node.block;
    std::visit(overloaded{
                   [](const ZeroBlock&) {},
                   [&](const DenseBlock& leaf) {
                       auto xs = x.middleRows(offset(b.col_lo), extent(b.cols()));
                       auto ys = y.middleRows(offset(b.row_lo), extent(b.rows()));
                       if (leaf.diagonal) {
                           const Eigen::MatrixXd t = leaf.values.triangularView<Eigen::Lower>() * xs;
                           ys += alpha * t;
                       } else
                           ys.noalias() += alpha * leaf.values * xs;
                   },
                   [&](const LowRankBlock& leaf) {
                       const Eigen::MatrixXd coeffs =
                           leaf.b.transpose() * x.middleRows(offset(b.col_lo), extent(b.cols()));
                       y.middleRows(offset(b.row_lo), extent(b.rows())).noalias() += alpha * leaf.a * coeffs;
                   },
                   [&](const QuadBlock& quad) {
                       for (const auto& child : quad.children)
                           multiply_add_node(*child, x, y, alpha);
                   },
               },
               node.content);
}

void forward_solve_node(const HNode& node, Eigen::Ref<Eigen::MatrixXd> x, const HMatrix::DiagonalSolver& solver) {
    const auto& b = node.block;
    std::visit(overloaded{
                   [&](const DenseBlock& leaf) {
                       solver(leaf.values, b.row_lo, x.middleRows(offset(b.row_lo), extent(b.rows())));
                   },
                   [&](const QuadBlock& quad) {
                       forward_solve_node(*quad.children[0], x, solver);
                       multiply_add_node(*quad.children[2], x, x, -1.0);
                       forward_solve_node(*quad.children[3], x, solver);
                   },
                   [](const auto&) {
                       throw std::logic_error("diagonal block of the H-matrix must be dense or subdivided");
                   },
               },
               node.content);
}

void visit_leaves(const HNode& node, const std::function<void(const HNode&)>& visit) {
    if (const auto* quad = std::get_if<QuadBlock>(&node.content)) {
        for (const auto& child : quad->children)
            visit_leaves(*child, visit);
    } else {
        visit(node);
    }
}

void dump_node(const HNode& node, std::ostream& out, int depth) {
    const auto& b = node.block;
    out << std::string(static_cast<std::size_t>(2 * depth), ' ') << to_string(node.kind()) << " [" << b.row_lo
        << ',' << b.row_hi << "]x[" << b.col_lo << ',' << b.col_hi << ']';
    if (const auto* lr = std::get_if<LowRankBlock>(&node.content))
        out << " rank=" << lr->a.cols();
    out << '\n';
    if (const auto* quad = std::get_if<QuadBlock>(&node.content))
        for (const auto& child : quad->children)
            dump_node(*child, out, depth + 1);
}

}  // namespace

bool admissible(Interval target, Interval source) {
    if (!(source.hi < target.lo))
        return false;
    return target.diam() <= target.lo - source.hi;
}

Interval row_interval(const TemporalMesh& mesh, const BlockIndex& block) {
    return {mesh[block.row_lo - 1], mesh[block.row_hi]};
}

Interval col_interval(const TemporalMesh& mesh, const BlockIndex& block) {
    return {mesh[block.col_lo - 1], mesh[std::min(block.col_hi + 1, mesh.steps())]};
}

bool admissible(const TemporalMesh& mesh, const BlockIndex& block) {
    return admissible(row_interval(mesh, block), col_interval(mesh, block));
}

double taylor_coefficient(double delta, std::size_t nu) {
    double c = 1.0;
    for (std::size_t l = 1; l <= nu; ++l)
        c *= (1.0 - delta - static_cast<double>(l)) / static_cast<double>(l);
    return c;
}

LowRankFactors lowrank_factors(const TemporalMesh& mesh, double delta, const BlockIndex& block, std::size_t rank) {
    if (rank == 0)
        throw std::invalid_argument("rank must be at least 1");
    if (block.row_lo < 1 || block.row_hi > mesh.steps() || block.col_lo < 1 || block.row_lo > block.row_hi ||
        block.col_lo > block.col_hi)
        throw std::out_of_range("block index outside 1..M");
    if (!block.below_diagonal() || !admissible(mesh, block))
        throw std::invalid_argument("low-rank factors requested for a non-admissible block");
    // admissible blocks are separated from the diagonal, so the half hat at j = M never appears
    if (block.col_hi >= mesh.steps())
        throw std::logic_error("admissible block touches the last column");

    const Interval rows = row_interval(mesh, block);
    const double center = 0.5 * (rows.lo + rows.hi);
    const double rho = 0.5 * rows.diam();
    const double inv_gamma_1md = 1.0 / std::tgamma(1.0 - delta);

    LowRankFactors f;
    f.a.resize(extent(block.rows()), extent(rank));
    f.b.resize(extent(block.cols()), extent(rank));
    for (std::size_t i = 0; i < block.rows(); ++i) {
        const double s = (mesh[block.row_lo + i] - center) / rho;
        double power = inv_gamma_1md;
        for (std::size_t nu = 0; nu < rank; ++nu) {
            f.a(extent(i), extent(nu)) = power;
            power *= s;
        }
    }
    double c = 1.0;
    for (std::size_t nu = 0; nu < rank; ++nu) {
        if (nu > 0)
            c *= (1.0 - delta - static_cast<double>(nu)) / static_cast<double>(nu);
        const double scale = c / (1.0 - delta - static_cast<double>(nu));
        for (std::size_t jj = 0; jj < block.cols(); ++jj) {
            const std::size_t j = block.col_lo + jj;
            f.b(extent(jj), extent(nu)) =
                scale * scaled_hat_difference(center - mesh[j], mesh.step(j), mesh.step(j + 1), rho, delta, nu);
        }
    }
    return f;
}

const char* to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::Zero: return "Zero";
    case NodeKind::Dense: return "Dense";
    case NodeKind::LowRank: return "LowRank";
    case NodeKind::Quad: return "Quad";
    }
    return "?";
}

HMatrix HMatrix::build(const TemporalMesh& mesh, double delta, HOptions options) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("fractional order must lie in (0,1)");
    if (options.rank < 1)
        throw std::invalid_argument("rank must be at least 1");
    if (options.leaf_size < 2)
        throw std::invalid_argument("leaf size must be at least 2");
    HMatrix h;
    h.size_ = mesh.steps();
    h.delta_ = delta;
    h.options_ = options;
    h.root_ = Builder(mesh, delta, options).build({1, mesh.steps(), 1, mesh.steps()});
    return h;
}

void HMatrix::multiply_add(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y,
                           double alpha) const {
    if (static_cast<std::size_t>(x.rows()) != size_ || static_cast<std::size_t>(y.rows()) != size_ ||
        x.cols() != y.cols())
        throw std::invalid_argument("H-matrix product: operand shape mismatch");
    multiply_add_node(*root_, x, y, alpha);
}

std::vector<double> HMatrix::matvec(std::span<const double> x) const {
    if (x.size() != size_)
        throw std::invalid_argument("H-matrix product: vector length " + std::to_string(x.size()) +
                                    " does not match M = " + std::to_string(size_));
    std::vector<double> y(size_, 0.0);
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), extent(size_));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), extent(size_));
    multiply_add_node(*root_, xv, yv, 1.0);
    return y;
}

void HMatrix::shifted_forward_solve_inplace(double shift, Eigen::Ref<Eigen::MatrixXd> x) const {
    if (!(shift >= 0.0))
        throw std::invalid_argument("diagonal shift must be non-negative");
    if (static_cast<std::size_t>(x.rows()) != size_)
        throw std::invalid_argument("H-matrix solve: operand shape mismatch");
    forward_solve(x, [shift](const Eigen::MatrixXd& block, std::size_t, Eigen::Ref<Eigen::MatrixXd> rhs) {
        Eigen::MatrixXd shifted = block;
        shifted.diagonal().array() += shift;
        if (!(shifted.diagonal().minCoeff() > 0.0))
            throw std::logic_error("singular diagonal block in shifted forward substitution");
        shifted.triangularView<Eigen::Lower>().solveInPlace(rhs);
    });
}

std::vector<double> HMatrix::shifted_forward_solve(double shift, std::span<const double> b) const {
    if (b.size() != size_)
        throw std::invalid_argument("H-matrix solve: vector length " + std::to_string(b.size()) +
                                    " does not match M = " + std::to_string(size_));
    std::vector<double> x(b.begin(), b.end());
    Eigen::Map<Eigen::VectorXd> xv(x.data(), extent(size_));
    shifted_forward_solve_inplace(shift, xv);
    return x;
}

void HMatrix::forward_solve(Eigen::Ref<Eigen::MatrixXd> x, const DiagonalSolver& solver) const {
    forward_solve_node(*root_, x, solver);
}

Eigen::MatrixXd HMatrix::densify() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(extent(size_), extent(size_));
    for_each_leaf([&out](const HNode& node) {
        const auto& b = node.block;
        auto target = out.block(offset(b.row_lo), offset(b.col_lo), extent(b.rows()), extent(b.cols()));
        if (const auto* d = std::get_if<DenseBlock>(&node.content)) {
            if (d->diagonal)
                target = d->values.triangularView<Eigen::Lower>();
            else
                target = d->values;
        } else if (const auto* lr = std::get_if<LowRankBlock>(&node.content)) {
            target = lr->a * lr->b.transpose();
        }
    });
    return out;
}

StorageReport HMatrix::storage() const {
    StorageReport report;
    report.dense_equivalent_scalars = size_ * (size_ + 1) / 2;
    for_each_leaf([&report](const HNode& node) {
        const auto& b = node.block;
        switch (node.kind()) {
        case NodeKind::Zero: ++report.zero_leaves; break;
        case NodeKind::Dense:
            ++report.dense_leaves;
            report.dense_scalars += std::get<DenseBlock>(node.content).diagonal ? b.rows() * (b.rows() + 1) / 2
                                                                                 : b.rows() * b.cols();
            break;
        case NodeKind::LowRank: {
            ++report.lowrank_leaves;
            const auto k = static_cast<std::size_t>(std::get<LowRankBlock>(node.content).a.cols());
            report.lowrank_scalars += k * (b.rows() + b.cols());
            break;
        }
        case NodeKind::Quad: break;
        }
    });
    return report;
}

void HMatrix::for_each_leaf(const std::function<void(const HNode&)>& visit) const { visit_leaves(*root_, visit); }

void HMatrix::dump(std::ostream& out) const { dump_node(*root_, out, 0); }

std::vector<double> hmatvec(const HMatrix& h, std::span<const double> x) { return h.matvec(x); }

std::vector<double> shifted_forward_solve(const HMatrix& h, double shift, std::span<const double> b) {
    return h.shifted_forward_solve(shift, b);
}

}  // namespace fracwrmg
