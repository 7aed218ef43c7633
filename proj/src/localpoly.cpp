#include "mbm/localpoly.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mbm {

Kernel::Kernel(KernelShape shape, KernelSupport support)
    : shape_(shape), support_(support) {
  if (shape == KernelShape::custom_sampled)
    throw std::invalid_argument("use Kernel::custom for sampled kernels");
}

Kernel Kernel::custom(const Eigen::VectorXd& values, KernelSupport support) {
  if (values.size() < 2 || values.minCoeff() < 0.0 || values.maxCoeff() <= 0.0)
    throw std::invalid_argument("custom kernel needs >= 2 nonnegative samples, not all zero");
  Kernel k(KernelShape::epanechnikov, support);
  k.shape_ = KernelShape::custom_sampled;
  // trapezoid normalization: integral of the piecewise-linear interpolant
  const double width = (support == KernelSupport::two_sided) ? 2.0 : 1.0;
  const double h = width / double(values.size() - 1);
  double integral = 0.0;
  for (Eigen::Index i = 0; i + 1 < values.size(); ++i)
    integral += 0.5 * h * (values[i] + values[i + 1]);
  k.samples_ = values / integral;
  return k;
}

double Kernel::operator()(double x) const {
  const double lo = support_lo(), hi = support_hi();
  if (x < lo || x > hi) return 0.0;
  if (shape_ == KernelShape::custom_sampled) {
    const double pos = (x - lo) / (hi - lo) * double(samples_.size() - 1);
    Eigen::Index i = Eigen::Index(pos);
    if (i > samples_.size() - 2) i = samples_.size() - 2;
    const double frac = pos - double(i);
    return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
  }
  // base shapes live on [-1,1]; one-sided supports are the rescaled halves
  const double z = (support_ == KernelSupport::two_sided) ? x
                   : (support_ == KernelSupport::left)    ? 2.0 * x + 1.0
                                                          : 2.0 * x - 1.0;
  const double scale = (support_ == KernelSupport::two_sided) ? 1.0 : 2.0;
  switch (shape_) {
    case KernelShape::epanechnikov: return scale * 0.75 * (1.0 - z * z);
    case KernelShape::uniform:      return scale * 0.5;
    case KernelShape::triangular:   return scale * (1.0 - std::abs(z));
    default:                        return 0.0;
  }
}

WeightVector weights(const Kernel& kernel, int n, double u, double b, int degree) {
  if (n < 2) throw std::invalid_argument("weights: n must be >= 2");
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("weights: u must lie in [0,1]");
  if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("weights: b must lie in (0,1)");
  if (degree < 0) throw std::invalid_argument("weights: degree must be >= 0");

  // closed window: |i/n - u| <= b restricted to the kernel support
  const double lo = u + b * kernel.support_lo();
  const double hi = u + b * kernel.support_hi();
  int i0 = int(std::ceil(lo * n - 1e-9));
  int i1 = int(std::floor(hi * n + 1e-9));
  if (i0 < 1) i0 = 1;
  if (i1 > n) i1 = n;
  const int m = i1 - i0 + 1;
  const int p = degree + 1;
  auto window_str = [&] {
    return "window [" + std::to_string(i0) + "," + std::to_string(i1) + "] at u=" +
           std::to_string(u) + ", b=" + std::to_string(b);
  };
  if (m < p)
    throw std::runtime_error("weights: rank-deficient local fit, " + window_str());

  Eigen::VectorXd x(m), k(m);
  for (int i = 0; i < m; ++i) {
    x[i] = (double(i0 + i) / n - u) / b;
    k[i] = kernel(x[i]);
  }
  if (k.maxCoeff() <= 0.0)
    throw std::runtime_error("weights: no kernel mass in " + window_str());

  // design on the scaled basis x^j, rows weighted by sqrt(K)
  Eigen::MatrixXd design(m, p);
  design.col(0) = k.cwiseSqrt();
  for (int j = 1; j < p; ++j) design.col(j) = design.col(j - 1).cwiseProduct(x);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p)
    throw std::runtime_error("weights: rank-deficient local fit, " + window_str());

  // z = (X' K X)^{-1} e_1 via the QR factors of sqrt(K) X
  const auto R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(p);
  e1[0] = 1.0;
  Eigen::VectorXd v = qr.colsPermutation().transpose() * e1;
  Eigen::VectorXd y = R.transpose().solve(v);
  Eigen::VectorXd z = qr.colsPermutation() * Eigen::VectorXd(R.solve(y));

  WeightVector wv;
  wv.u = u;
  wv.b = b;
  wv.degree = degree;
  wv.first = i0;
  wv.w.resize(m);
  for (int i = 0; i < m; ++i) {
    double basis = 0.0, pw = 1.0;
    for (int j = 0; j < p; ++j) {
      basis += z[j] * pw;
      pw *= x[i];
    }
    wv.w[i] = k[i] * basis;
  }
  return wv;
}

double smooth(const WeightVector& wv, const Eigen::VectorXd& y) {
  const int n = int(y.size());
  if (wv.first < 1 || wv.last() > n)
    throw std::invalid_argument("smooth: weight window [" + std::to_string(wv.first) + "," +
                                std::to_string(wv.last()) + "] exceeds series length " +
                                std::to_string(n));
  return wv.w.dot(y.segment(wv.first - 1, wv.w.size()));
}

Eigen::Vector2d smooth(const WeightVector& wv, const Eigen::VectorXd& y1,
                       const Eigen::VectorXd& y2) {
  return {smooth(wv, y1), smooth(wv, y2)};
}

}  // namespace mbm
