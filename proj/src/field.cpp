#include "fracwrmg/field.hpp"

namespace fracwrmg {

SpaceTimeField::SpaceTimeField(std::size_t points, std::size_t steps)
    : data_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(points))) {}

double SpaceTimeField::max_abs() const { return data_.size() == 0 ? 0.0 : data_.cwiseAbs().maxCoeff(); }

bool SpaceTimeField::same_shape(const SpaceTimeField& other) const {
    return points() == other.points() && steps() == other.steps();
}

}  // namespace fracwrmg
