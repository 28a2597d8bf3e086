#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "oament/counts.hpp"
#include "oament/errors.hpp"

namespace oament::counts {

namespace {

struct Samples {
  std::vector<double> angle_deg;
  std::vector<double> counts;
};

Samples collect(std::span<const ScanRecord> records, Arm axis) {
  Samples s;
  for (const auto& r : records) {
    if (!(r.coincidences >= 0.0) || !std::isfinite(r.coincidences)) throw FitError("negative or non-finite count");
    s.angle_deg.push_back(r.angle(axis));
    s.counts.push_back(r.coincidences);
  }
  return s;
}

struct LinearFit {
  Eigen::Vector3d beta;
  Eigen::Matrix3d normal;  // X^T W X
};

// Weighted least squares of y = b0 + b1 cos(k x) + b2 sin(k x); k in rad/deg.
LinearFit weighted_fit(const Samples& s, double k, const std::vector<double>& weight) {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    const Eigen::Vector3d x(1.0, std::cos(k * s.angle_deg[i]), std::sin(k * s.angle_deg[i]));
    a.noalias() += weight[i] * x * x.transpose();
    rhs.noalias() += weight[i] * s.counts[i] * x;
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() < 3) throw FitError("degenerate fringe design (angles do not resolve the period)");
  return {lu.solve(rhs), a};
}

double model(const Eigen::Vector3d& b, double k, double x) {
  return b[0] + b[1] * std::cos(k * x) + b[2] * std::sin(k * x);
}

double weighted_chi2(const Samples& s, double k, const std::vector<double>& weight, const Eigen::Vector3d& b) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    const double r = s.counts[i] - model(b, k, s.angle_deg[i]);
    chi2 += weight[i] * r * r;
  }
  return chi2;
}

// Poisson likelihood with identity link: IRLS with weights 1/mu reaches the MLE,
// and the inverse of the final normal matrix is the Fisher covariance.
FringeFit poisson_fit(const Samples& s, double k) {
  const std::size_t n = s.counts.size();
  double mean = 0.0;
  for (double c : s.counts) mean += c;
  mean /= static_cast<double>(n);
  if (!(mean > 0.0)) throw FitError("no counts to fit");
  const double floor = 1e-3 * mean;

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(s.counts[i], std::max(floor, 1.0));

  LinearFit fit = weighted_fit(s, k, w);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(model(fit.beta, k, s.angle_deg[i]), floor);
    const LinearFit next = weighted_fit(s, k, w);
    const double change = (next.beta - fit.beta).norm();
    fit = next;
    if (change <= 1e-12 * std::max(1.0, fit.beta.norm())) break;
  }
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(model(fit.beta, k, s.angle_deg[i]), floor);
  const Eigen::Matrix3d fisher = [&] {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d x(1.0, std::cos(k * s.angle_deg[i]), std::sin(k * s.angle_deg[i]));
      a.noalias() += w[i] * x * x.transpose();
    }
    return a;
  }();
  const Eigen::Matrix3d cov = fisher.inverse();

  const auto& b = fit.beta;
  if (!(b[0] > 0.0)) throw FitError("fitted fringe offset is not positive");
  FringeFit out;
  out.offset = b[0];
  out.amplitude = std::hypot(b[1], b[2]);
  out.phase = std::atan2(-b[2], b[1]);
  const double v = out.amplitude / b[0];
  out.visibility = std::clamp(v, 0.0, 1.0);

  // delta method for V = sqrt(b1^2 + b2^2) / b0
  Eigen::Vector3d grad(-v / b[0], 0.0, 0.0);
  if (out.amplitude > 0.0) {
    grad[1] = b[1] / (out.amplitude * b[0]);
    grad[2] = b[2] / (out.amplitude * b[0]);
  }
  out.sigma_visibility = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
  out.chi2 = weighted_chi2(s, k, w, b);
  out.dof = static_cast<int>(n) - 3;
  return out;
}

}  // namespace

FringeFit fit_fringe(std::span<const ScanRecord> records, int l, Arm axis) {
  if (l < 1) throw FitError("fringe fit requires l >= 1");
  const auto s = collect(records, axis);
  if (s.counts.size() < 4) throw FitError("fringe fit needs at least 4 points");
  const auto [lo, hi] = std::minmax_element(s.angle_deg.begin(), s.angle_deg.end());
  const double period = 360.0 / (2.0 * l);
  if (*hi - *lo < 0.5 * period - 1e-12)
    throw FitError("scan spans " + std::to_string(*hi - *lo) + " deg, less than half the " +
                   std::to_string(period) + " deg period");
  return poisson_fit(s, 2.0 * std::numbers::pi / period);
}

FreePeriodFit fit_fringe_free_period(std::span<const ScanRecord> records, Arm axis) {
  const auto s = collect(records, axis);
  const std::size_t n = s.counts.size();
  if (n < 8) throw FitError("free-period fit needs at least 8 points");
  const auto [lo, hi] = std::minmax_element(s.angle_deg.begin(), s.angle_deg.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) throw FitError("scan has zero angular span");

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(s.counts[i], 1.0);

  // chi^2 as a function of the number of fringes across the span
  auto chi2_at = [&](double fringes) {
    const double k = 2.0 * std::numbers::pi * fringes / span;
    try {
      return weighted_chi2(s, k, w, weighted_fit(s, k, w).beta);
    } catch (const FitError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  constexpr double step = 0.02;
  const double max_fringes = 0.5 * static_cast<double>(n - 1);
  double best = 0.5, best_chi2 = chi2_at(best);
  for (double f = 0.5 + step; f <= max_fringes; f += step) {
    const double c = chi2_at(f);
    if (c < best_chi2) {
      best_chi2 = c;
      best = f;
    }
  }

  // golden-section refinement inside the bracketing grid cells
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best - step, b = best + step;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = chi2_at(x1), f2 = chi2_at(x2);
  while (b - a > 1e-9) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = chi2_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = chi2_at(x2);
    }
  }
  const double fringes = 0.5 * (a + b);
  FreePeriodFit out;
  out.fringes = fringes;
  out.period_deg = span / fringes;
  out.fit = poisson_fit(s, 2.0 * std::numbers::pi * fringes / span);
  return out;
}

}  // namespace oament::counts
