#pragma once

#include <Eigen/Dense>

namespace hec {

// Row-major to match the on-disk and on-wire layout (rows x cols, row by row).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline bool all_finite(const Mat& m) { return m.allFinite(); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace hec
