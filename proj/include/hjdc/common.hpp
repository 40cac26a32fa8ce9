#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hjdc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error categories map one-to-one onto CLI exit codes (2, 3, 4).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hjdc
