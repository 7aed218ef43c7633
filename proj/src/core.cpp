#include "mbm/core.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbm {

ThetaFunction::ThetaFunction(Eigen::VectorXd h_samples, Eigen::VectorXd sigma_samples,
                             double eta)
    : h_(std::move(h_samples)), s_(std::move(sigma_samples)), eta_(eta) {
  if (h_.size() != s_.size() || h_.size() < 2)
    throw std::invalid_argument("ThetaFunction: need equal sample lengths >= 2");
  if (!(eta_ > 0))
    throw std::invalid_argument("ThetaFunction: eta must be > 0");
  for (Eigen::Index i = 0; i < h_.size(); ++i) {
    if (!(h_[i] > 0.0 && h_[i] < 1.0))
      throw std::invalid_argument("ThetaFunction: h_samples[" + std::to_string(i) +
                                  "]=" + std::to_string(h_[i]) + " outside (0,1)");
    if (!(s_[i] > 0.0) || !std::isfinite(s_[i]))
      throw std::invalid_argument("ThetaFunction: sigma_samples[" + std::to_string(i) +
                                  "]=" + std::to_string(s_[i]) + " not positive");
  }
  h_lo_ = h_.minCoeff();
  h_hi_ = h_.maxCoeff();
  s_lo_ = s_.minCoeff();
  s_hi_ = s_.maxCoeff();
}

namespace {
// Linear interpolation on equally spaced samples over [0,1]; written as
// a + frac*(b-a) so that flat segments reproduce the sample value bit-exactly.
double interp(const Eigen::VectorXd& y, double v) {
  const Eigen::Index m = y.size();
  if (v <= 0.0) return y[0];
  if (v >= 1.0) return y[m - 1];
  const double pos = v * double(m - 1);
  Eigen::Index i = Eigen::Index(pos);
  if (i > m - 2) i = m - 2;
  const double frac = pos - double(i);
  return y[i] + frac * (y[i + 1] - y[i]);
}
}  // namespace

double ThetaFunction::hurst(double v) const { return interp(h_, v); }
double ThetaFunction::sigma(double v) const { return interp(s_, v); }

ThetaFunction theta_from_samples(const Eigen::VectorXd& h_samples,
                                 const Eigen::VectorXd& sigma_samples, double eta) {
  return ThetaFunction(h_samples, sigma_samples, eta);
}

PathDiagnostics validate_path(const SamplePath& path) {
  PathDiagnostics d;
  d.length = int(path.values.size());
  d.n = path.grid.n;
  d.lead_in = path.grid.lead_in;
  d.structural_mismatch =
      path.grid.n <= 0 || path.grid.lead_in < 0 || d.length != path.grid.points();
  for (Eigen::Index j = 0; j < path.values.size(); ++j) {
    if (!std::isfinite(path.values[j])) {
      if (d.first_bad_index < 0) d.first_bad_index = long(j);
      ++d.nonfinite_count;
    }
  }
  return d;
}

void write_path_csv(const SamplePath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << "t,x\n";
  char tbuf[64], xbuf[64];
  for (int j = 0; j < path.grid.points(); ++j) {
    std::snprintf(tbuf, sizeof tbuf, "%.12g", path.grid.time(j));
    std::snprintf(xbuf, sizeof xbuf, "%.17g", path.values[j]);
    out << tbuf << ',' << xbuf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + file);
}

SamplePath read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open: " + file);
  std::string line;
  if (!std::getline(in, line) || (line != "t,x" && line != "t,x\r"))
    throw std::runtime_error(file + ": expected header \"t,x\"");
  std::vector<double> t, x;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(file + ": malformed row \"" + line + "\"");
    t.push_back(std::stod(line.substr(0, comma)));
    x.push_back(std::stod(line.substr(comma + 1)));
  }
  if (t.size() < 3) throw std::runtime_error(file + ": too few rows");

  const double dt = t[1] - t[0];
  if (!(dt > 0)) throw std::runtime_error(file + ": non-increasing time column");
  const int n = int(std::llround(1.0 / dt));
  const int lead_in = int(std::llround(-t[0] * n));
  SamplePath path;
  path.grid = ObservationGrid{n, lead_in};
  if (int(t.size()) != path.grid.points())
    throw std::runtime_error(file + ": row count " + std::to_string(t.size()) +
                             " does not match n=" + std::to_string(n) +
                             ", lead_in=" + std::to_string(lead_in));
  for (int j = 0; j < int(t.size()); ++j) {
    if (std::abs(t[j] - path.grid.time(j)) > 1e-9)
      throw std::runtime_error(file + ": time column is not a regular 1/n grid at row " +
                               std::to_string(j));
  }
  path.values = Eigen::Map<const Eigen::VectorXd>(x.data(), Eigen::Index(x.size()));
  return path;
}

void write_theta_csv(const ThetaFunction& theta, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << "v,h,sigma\n";
  const Eigen::Index m = theta.samples();
  char buf[160];
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = double(i) / double(m - 1);
    std::snprintf(buf, sizeof buf, "%.12g,%.17g,%.17g\n", v, theta.hurst(v), theta.sigma(v));
    out << buf;
  }
}

ThetaFunction read_theta_csv(const std::string& file, double eta) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open: " + file);
  std::string line;
  if (!std::getline(in, line) || line.rfind("v,h,sigma", 0) != 0)
    throw std::runtime_error(file + ": expected header \"v,h,sigma\"");
  std::vector<double> v, h, s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double vals[3];
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(row, cell, ','))
        throw std::runtime_error(file + ": malformed row \"" + line + "\"");
      vals[c] = std::stod(cell);
    }
    v.push_back(vals[0]);
    h.push_back(vals[1]);
    s.push_back(vals[2]);
  }
  const int m = int(v.size());
  if (m < 2) throw std::runtime_error(file + ": need at least 2 samples");
  for (int i = 0; i < m; ++i) {
    if (std::abs(v[i] - double(i) / (m - 1)) > 1e-9)
      throw std::runtime_error(file + ": v column must be equally spaced on [0,1]");
  }
  return ThetaFunction(Eigen::Map<const Eigen::VectorXd>(h.data(), m),
                       Eigen::Map<const Eigen::VectorXd>(s.data(), m), eta);
}

}  // namespace mbm
