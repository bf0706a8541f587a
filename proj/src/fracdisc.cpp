#include "fracwrmg/fracdisc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fracwrmg/field.hpp"

namespace fracwrmg {

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("fractional order must lie in (0,1), got " + std::to_string(delta));
}

}  // namespace

L1Coefficients::L1Coefficients(TemporalMesh mesh, double delta)
    : mesh_(std::move(mesh)), delta_(delta) {
    check_delta(delta);
    inv_gamma_2md_ = 1.0 / std::tgamma(2.0 - delta);
}

double L1Coefficients::unchecked(std::size_t m, std::size_t k) const {
    if (k == 0)
        return 0.0;
    if (k == 1)
        return std::pow(mesh_.step(m), -delta_) * inv_gamma_2md_;
    const double p = 1.0 - delta_;
    const double far = mesh_[m] - mesh_[m - k];
    const double tau = mesh_.step(m - k + 1);
    const double diff = -std::pow(far, p) * std::expm1(p * std::log1p(-tau / far));
    return diff / tau * inv_gamma_2md_;
}

double L1Coefficients::operator()(std::size_t m, std::size_t k) const {
    if (k < 1 || k > m || m > steps())
        throw std::out_of_range("d(m,k) requires 1 <= k <= m <= M, got m=" + std::to_string(m) +
                                ", k=" + std::to_string(k));
    return unchecked(m, k);
}

double L1Coefficients::r_entry(std::size_t m, std::size_t j) const {
    if (m < 1 || m > steps() || j < 1 || j > steps())
        throw std::out_of_range("R index out of range");
    if (j > m)
        return 0.0;
    if (j == m)
        return unchecked(m, 1);
    // d(m, m-j+1) - d(m, m-j) without subtracting two nearly equal weights
    const double a = mesh_[m] - mesh_[j];
    return std::pow(a, -delta_) * hat_difference(mesh_.step(j) / a, mesh_.step(j + 1) / a, 1.0 - delta_) *
           inv_gamma_2md_;
}

double hat_difference(double el, double er, double p) {
    if (std::max(el, er) > 0.05)
        return std::expm1(p * std::log1p(el)) / el + std::expm1(p * std::log1p(-er)) / er;
    double binom = p * (p - 1.0) / 2.0;
    double pl = el, pr = -er;
    double sum = 0.0;
    for (int n = 2; n < 400; ++n) {
        const double term = binom * (pl - pr);
        sum += term;
        if (std::abs(binom) * (std::abs(pl) + std::abs(pr)) <= 1e-17 * std::abs(sum))
            break;
        binom *= (p - n) / (n + 1.0);
        pl *= el;
        pr *= -er;
    }
    return sum;
}

double d_coeff(const TemporalMesh& mesh, double delta, std::size_t m, std::size_t k) {
    return L1Coefficients(mesh, delta)(m, k);
}

TimeOperatorDense::TimeOperatorDense(std::size_t steps)
    : steps_(steps), packed_(steps * (steps + 1) / 2, 0.0) {}

double TimeOperatorDense::operator()(std::size_t m, std::size_t j) const {
    if (m < 1 || m > steps_ || j < 1 || j > steps_)
        throw std::out_of_range("R index out of range");
    return j > m ? 0.0 : packed_[offset(m) + j - 1];
}

double& TimeOperatorDense::at(std::size_t m, std::size_t j) {
    if (m < 1 || m > steps_ || j < 1 || j > m)
        throw std::out_of_range("R index out of range");
    return packed_[offset(m) + j - 1];
}

std::span<const double> TimeOperatorDense::row(std::size_t m) const {
    return std::span<const double>(packed_).subspan(offset(m), m);
}

std::vector<double> TimeOperatorDense::apply(std::span<const double> u) const {
    if (u.size() != steps_)
        throw std::invalid_argument("vector length " + std::to_string(u.size()) + " does not match M = " +
                                    std::to_string(steps_));
    std::vector<double> out(steps_, 0.0);
    for (std::size_t m = 1; m <= steps_; ++m) {
        const auto r = row(m);
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            acc += r[j] * u[j];
        out[m - 1] = acc;
    }
    return out;
}

void TimeOperatorDense::write_csv(std::ostream& out) const {
    const auto old = out.precision(17);
    out << "row,col,value\n";
    for (std::size_t m = 1; m <= steps_; ++m)
        for (std::size_t j = 1; j <= m; ++j)
            out << m << ',' << j << ',' << packed_[offset(m) + j - 1] << '\n';
    out.precision(old);
}

TimeOperatorDense assemble_dense_R(const TemporalMesh& mesh, double delta) {
    const L1Coefficients d(mesh, delta);
    const std::size_t steps = mesh.steps();
    TimeOperatorDense r(steps);
    for (std::size_t m = 1; m <= steps; ++m)
        for (std::size_t j = 1; j <= m; ++j)
            r.at(m, j) = d.r_entry(m, j);
    return r;
}

std::vector<double> apply_caputo_dense(const TimeOperatorDense& r, std::span<const double> u) {
    return r.apply(u);
}

SpaceTimeField initial_lift(const TemporalMesh& mesh, double delta, std::span<const double> g) {
    const L1Coefficients d(mesh, delta);
    const std::size_t steps = mesh.steps();
    SpaceTimeField lift(g.size(), steps);
    for (std::size_t m = 1; m <= steps; ++m) {
        const double w = d(m, m);
        for (std::size_t n = 0; n < g.size(); ++n)
            lift(n, m - 1) = w * g[n];
    }
    return lift;
}

}  // namespace fracwrmg
