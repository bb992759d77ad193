#pragma once

#include <Eigen/Dense>

namespace stokes {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace stokes
