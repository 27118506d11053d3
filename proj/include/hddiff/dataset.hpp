#pragma once

#include "hddiff/linalg.hpp"

#include <span>
#include <string>
#include <vector>

namespace hddiff {

enum class ModelKind { Regression, Ggm };

const char* to_string(ModelKind kind);

// One population's samples.
//
// Regression instances carry a single response column in `y` and the
// predictors in `x`; graphical-model instances carry all variables in `y`
// and leave `x` with zero columns.
class Dataset {
 public:
  Dataset() = default;

  // Validates shape and finiteness; throws InputError on violation.
  Dataset(Matrix y, Matrix x, std::vector<std::string> labels);

  static Dataset regression(const Vector& y, Matrix x, std::vector<std::string> labels = {});
  static Dataset ggm(Matrix y, std::vector<std::string> labels = {});

  ModelKind kind() const { return kind_; }
  Eigen::Index n() const { return y_.rows(); }
  // Number of response columns (k).
  Eigen::Index k() const { return y_.cols(); }
  // Number of predictor columns (l).
  Eigen::Index l() const { return x_.cols(); }

  const Matrix& y() const { return y_; }
  const Matrix& x() const { return x_; }
  Vector response() const { return y_.col(0); }
  const std::vector<std::string>& labels() const { return labels_; }

  Dataset rows(std::span<const int> idx) const;

  // Column-centred copy (graphical models only use this as preprocessing).
  Dataset centered() const;

  // Second-moment matrix (1/n) Y^T Y.
  Matrix second_moment() const;

 private:
  Matrix y_;
  Matrix x_;
  std::vector<std::string> labels_;
  ModelKind kind_ = ModelKind::Regression;
};

// Row-wise concatenation of two compatible datasets.
Dataset stack(const Dataset& a, const Dataset& b);

// Throws InputError unless both datasets share kind and column layout.
void require_compatible(const Dataset& a, const Dataset& b);

}  // namespace hddiff
