// Shared domain types: parameter paths theta_v = (sigma_v, H_v), observation
// grids, sample paths, and the CSV interchange format.
#pragma once

#include <Eigen/Core>
#include <string>

namespace mbm {

// Sampled parameter path v -> (sigma_v, H_v) on [0,1] with linear
// interpolation between equally spaced samples. For v < 0 the path is
// extended as theta_0, for v > 1 as theta_1. Immutable after construction.
class ThetaFunction {
 public:
  ThetaFunction(Eigen::VectorXd h_samples, Eigen::VectorXd sigma_samples, double eta);

  double hurst(double v) const;
  double sigma(double v) const;
  double eta() const { return eta_; }

  double h_lo() const { return h_lo_; }
  double h_hi() const { return h_hi_; }
  double sigma2_lo() const { return s_lo_ * s_lo_; }
  double sigma2_hi() const { return s_hi_ * s_hi_; }

  bool constant_hurst() const { return h_lo_ == h_hi_; }
  Eigen::Index samples() const { return h_.size(); }

 private:
  Eigen::VectorXd h_, s_;
  double eta_ = 1.0;
  double h_lo_ = 0, h_hi_ = 0, s_lo_ = 0, s_hi_ = 0;
};

ThetaFunction theta_from_samples(const Eigen::VectorXd& h_samples,
                                 const Eigen::VectorXd& sigma_samples, double eta);

// Regular grid {-lead_in/n, ..., 0, 1/n, ..., n/n}. Times are derived from
// (n, lead_in), never stored.
struct ObservationGrid {
  int n = 0;
  int lead_in = 3;

  int points() const { return n + lead_in + 1; }
  double time(int j) const { return double(j - lead_in) / double(n); }
  int index_of_zero() const { return lead_in; }
  // grid index of observation time i/n, i = -lead_in..n
  int index_of(int i) const { return i + lead_in; }
};

struct SamplePath {
  ObservationGrid grid;
  Eigen::VectorXd values;  // values[j] = X at grid.time(j)
};

struct PathDiagnostics {
  int length = 0;
  int n = 0;
  int lead_in = 0;
  int nonfinite_count = 0;
  long first_bad_index = -1;
  bool structural_mismatch = false;

  bool valid() const { return !structural_mismatch && nonfinite_count == 0; }
};

// Pure inspection; never throws, never mutates.
PathDiagnostics validate_path(const SamplePath& path);

// CSV format: header "t,x"; one row per grid point including the lead-in rows
// with negative t; t printed as j/n with 12 significant digits, x with full
// double precision. The reader reconstructs n from the spacing and validates
// the grid structure.
void write_path_csv(const SamplePath& path, const std::string& file);
SamplePath read_path_csv(const std::string& file);

// Theta CSV: header "v,h,sigma", samples equally spaced on [0,1].
void write_theta_csv(const ThetaFunction& theta, const std::string& file);
ThetaFunction read_theta_csv(const std::string& file, double eta);

}  // namespace mbm
