// Kernel functions and local polynomial regression weights. The weights are
// the first row of the degree-l weighted least-squares hat construction and
// satisfy sum w = 1 and vanishing moments up to the fitted degree.
#pragma once

#include <Eigen/Core>

namespace mbm {

enum class KernelShape { epanechnikov, uniform, triangular, custom_sampled };
enum class KernelSupport { two_sided, left, right };  // [-1,1], [-1,0], [0,1]

class Kernel {
 public:
  explicit Kernel(KernelShape shape, KernelSupport support = KernelSupport::two_sided);

  // Piecewise-linear density from samples on [support_lo, support_hi];
  // normalized to unit integral at construction.
  static Kernel custom(const Eigen::VectorXd& values, KernelSupport support);

  double operator()(double x) const;
  KernelShape shape() const { return shape_; }
  KernelSupport support() const { return support_; }
  double support_lo() const { return support_ == KernelSupport::right ? 0.0 : -1.0; }
  double support_hi() const { return support_ == KernelSupport::left ? 0.0 : 1.0; }

 private:
  KernelShape shape_;
  KernelSupport support_;
  Eigen::VectorXd samples_;  // custom_sampled only
};

// Linear-representation weights w_i, i = first..first+w.size()-1 (1-based
// observation indices), vanishing outside the bandwidth window.
struct WeightVector {
  double u = 0;
  double b = 0;
  int degree = 0;
  int first = 1;
  Eigen::VectorXd w;

  int last() const { return first + int(w.size()) - 1; }
};

// Weighted least-squares weights of degree-l local polynomial regression of
// observations y_1..y_n on the grid i/n, evaluated at u with bandwidth b.
// Boundary windows are truncated to [1, n]; a window whose design has rank
// below degree+1 raises an error naming the window.
WeightVector weights(const Kernel& kernel, int n, double u, double b, int degree);

double smooth(const WeightVector& wv, const Eigen::VectorXd& y);
Eigen::Vector2d smooth(const WeightVector& wv, const Eigen::VectorXd& y1,
                       const Eigen::VectorXd& y2);

}  // namespace mbm
