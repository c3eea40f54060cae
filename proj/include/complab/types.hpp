#pragma once

#include <Eigen/Core>

namespace complab {

// Upper bound on the number of factors. Vectors and matrices are sized at
// run time but live on the stack, which keeps the per-path kernels free of
// heap traffic.
inline constexpr int kMaxFactors = 4;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxFactors, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0,
                             kMaxFactors, kMaxFactors>;

// A (time, state) pair.
struct SpacePoint {
    double t = 0.0;
    Vector x;
};

}  // namespace complab
