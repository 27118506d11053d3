#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/linalg.hpp"

#include <string>
#include <variant>

namespace hddiff {

// Address of one component of the parameter vector phi.
//
// Regression: phi = (beta_0..beta_{l-1}, sigma^2), sigma^2 at position l.
// Graphical model: entries (j, j') with j >= j' in row-major lower-triangle
// order, i.e. position j(j+1)/2 + j'.
struct ParamIndex {
  enum class Kind { Coefficient, Variance, Entry };
  Kind kind = Kind::Coefficient;
  int row = 0;  // coefficient index, or j for an entry
  int col = 0;  // j' for an entry (row >= col)
  int position = 0;

  bool operator==(const ParamIndex&) const = default;
};

class ParamLayout {
 public:
  ParamLayout(ModelKind kind, int dim);
  static ParamLayout of(const Dataset& data);

  ModelKind kind() const { return kind_; }
  // l for regression, k for the graphical model.
  int dim() const { return dim_; }
  // Length of phi.
  int size() const;

  ParamIndex at(int position) const;
  ParamIndex coefficient(int j) const;
  ParamIndex variance() const;
  ParamIndex entry(int j, int jp) const;

  // Positions that every active set contains: sigma^2 or the diagonal.
  IndexSet always_active() const;

  std::string label(int position, const std::vector<std::string>& names = {}) const;

 private:
  ModelKind kind_;
  int dim_;
};

struct RegressionParams {
  Vector beta;
  double sigma2 = 1.0;
};

// Precision matrix with its cached inverse.
struct GgmParams {
  Matrix omega;
  Matrix sigma;

  // Throws InputError unless omega is symmetric positive definite.
  static GgmParams from_precision(const Matrix& omega);
  static GgmParams from_covariance(const Matrix& sigma);
};

using Params = std::variant<RegressionParams, GgmParams>;

ModelKind kind_of(const Params& params);

// Flattened phi in ParamLayout order.
Vector flatten(const Params& params);

// Validates a parameter against a layout; throws InputError.
void validate(const Params& params, const ParamLayout& layout);

}  // namespace hddiff
