#include "fracwrmg/exact.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracwrmg {

MittagLefflerValue mittag_leffler(double delta, double z) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("Mittag-Leffler order must lie in (0,1]");
    if (!(z <= 0.0 && z >= -kMittagLefflerMaxAbsArgument))
        throw std::invalid_argument("Mittag-Leffler argument must lie in [-1, 0], got " + std::to_string(z));
    constexpr int max_terms = 500;
    MittagLefflerValue out;
    double power = 1.0;
    for (int k = 0; k < max_terms; ++k) {
        const double term = power / std::tgamma(delta * k + 1.0);
        out.value += term;
        out.terms = k + 1;
        if (std::abs(term) < 1e-16 * std::abs(out.value) || term == 0.0) {
            out.converged = true;
            break;
        }
        power *= z;
    }
    return out;
}

double exact_solution_1d(double x, double t, double delta) {
    const auto e = mittag_leffler(delta, -std::pow(t, delta));
    return e.value * std::sin(x);
}

ManufacturedValue manufactured_2d(double x, double y, double t, double delta) {
    const double shape = std::sin(x) * std::sin(y);
    const double amplitude = t * t * t + std::pow(t, delta);
    const double caputo = std::tgamma(delta + 1.0) + std::tgamma(4.0) / std::tgamma(4.0 - delta) * std::pow(t, 3.0 - delta);
    return {amplitude * shape, 2.0 * amplitude * shape + caputo * shape};
}

double max_error(const SpaceTimeField& u, const SpatialGrid& grid, const TemporalMesh& mesh,
                 const ExactSampler& exact) {
    if (u.points() != grid.points() || u.steps() != mesh.steps())
        throw std::invalid_argument("max_error: field does not match grid and mesh");
    double err = 0.0;
    for (std::size_t p = 0; p < grid.points(); ++p) {
        const double x = grid.coordinate(p % grid.n + 1);
        const double y = grid.dim == 2 ? grid.coordinate(p / grid.n + 1) : 0.0;
        for (std::size_t m = 1; m <= mesh.steps(); ++m)
            err = std::max(err, std::abs(u(p, m - 1) - exact(x, y, mesh[m])));
    }
    return err;
}

std::vector<double> observed_orders(const ErrorStudy& study) {
    if (study.entries.size() < 2)
        throw std::invalid_argument("order study needs at least two error values");
    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < study.entries.size(); ++i) {
        const auto& a = study.entries[i];
        const auto& b = study.entries[i + 1];
        if (b.steps != 2 * a.steps)
            throw std::invalid_argument("order study requires consecutive doublings of M");
        if (!(a.error > 0.0 && b.error > 0.0))
            throw std::invalid_argument("order study requires positive errors");
        orders.push_back(std::log2(a.error / b.error));
    }
    return orders;
}

}  // namespace fracwrmg
