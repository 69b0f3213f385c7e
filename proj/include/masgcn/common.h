#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace masgcn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using IntMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// Stands in for -inf in distance masks so that softmax yields exact zeros.
inline constexpr double kMaskSentinel = -1e9;

inline constexpr int kNumClasses = 3;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace masgcn
