#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace latfuse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntRowVector = Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic>;

}  // namespace latfuse
