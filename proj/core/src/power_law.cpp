#include "pitmesh/power_law.hpp"

#include "pitmesh/error.hpp"
#include "pitmesh/log.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pitmesh {

std::vector<double> TimeSeries::times() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.t);
  return out;
}

std::vector<double> TimeSeries::depths() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.depth);
  return out;
}

std::vector<double> TimeSeries::widths() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.width);
  return out;
}

namespace fit {
namespace {

struct Residuals : Eigen::DenseFunctor<double> {
  Residuals(const Eigen::VectorXd& t, const Eigen::VectorXd& y)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(t.size())), t_(t), y_(y) {}

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    r = p[0] * t_.array().pow(p[1]) + p[2] - y_.array();
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    const Eigen::ArrayXd tb = t_.array().pow(p[1]);
    j.resize(t_.size(), 3);
    j.col(0) = tb.matrix();
    j.col(1) = (p[0] * tb * t_.array().log()).matrix();
    j.col(2).setOnes();
    return 0;
  }

  Eigen::VectorXd t_, y_;
};

// Best a and c for a fixed exponent.
Eigen::Vector2d linear_part(const Eigen::VectorXd& t, const Eigen::VectorXd& y, double b) {
  Eigen::MatrixXd a(t.size(), 2);
  a.col(0) = t.array().pow(b).matrix();
  a.col(1).setOnes();
  return a.colPivHouseholderQr().solve(y);
}

double initial_exponent(const Eigen::VectorXd& t, const Eigen::VectorXd& y) {
  // dy/dt = a b t^(b-1), so the log-log slope of the increments is b - 1.
  std::vector<double> lx, ly;
  for (Eigen::Index i = 0; i + 1 < t.size(); ++i) {
    const double dy = y[i + 1] - y[i];
    const double dt = t[i + 1] - t[i];
    if (dy > 0.0 && dt > 0.0) {
      lx.push_back(std::log(0.5 * (t[i] + t[i + 1])));
      ly.push_back(std::log(dy / dt));
    }
  }
  if (lx.size() < 2) return 1.0;
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) return 1.0;
  return std::clamp(1.0 + sxy / sxx, 0.05, 5.0);
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> t_in, std::span<const double> y_in) {
  if (t_in.size() != y_in.size()) throw ValidationError("fit: t and y lengths differ");
  if (t_in.size() < 4) throw ValidationError("fit: need at least 4 samples");
  const Eigen::Index n = static_cast<Eigen::Index>(t_in.size());
  Eigen::VectorXd t(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(t_in[i] > 0.0)) throw ValidationError("fit: times must be positive");
    t[i] = t_in[i];
    y[i] = y_in[i];
  }
  PowerLawFit out;
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (!(sst > 1e-24 * std::max(1.0, mean * mean) * n)) {
    out.a = 0.0;
    out.b = 1.0;
    out.c = mean;
    out.degenerate = true;
    out.converged = true;
    out.r_squared = 1.0;
    return out;
  }

  Eigen::VectorXd p(3);
  p[1] = initial_exponent(t, y);
  const Eigen::Vector2d ac = linear_part(t, y, p[1]);
  p[0] = ac[0];
  p[2] = ac[1];

  Residuals f(t, y);
  Eigen::LevenbergMarquardt<Residuals> lm(f);
  lm.setXtol(1e-14);
  lm.setFtol(1e-14);
  lm.setGtol(0.0);
  lm.setMaxfev(2000);
  const auto status = lm.minimize(p);
  out.iterations = static_cast<int>(lm.iterations());
  out.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::XtolTooSmall;
  if (!out.converged) log::warn("power-law fit stopped without converging (status ", status, ")");

  out.a = p[0];
  out.b = p[1];
  out.c = p[2];
  Eigen::VectorXd r;
  f(p, r);
  out.rss = r.squaredNorm();
  out.r_squared = 1.0 - out.rss / sst;
  Eigen::MatrixXd jac;
  f.df(p, jac);
  if (n > 3) {
    const double sigma2 = out.rss / static_cast<double>(n - 3);
    const Eigen::Matrix3d cov = sigma2 * (jac.transpose() * jac).inverse();
    out.se_a = std::sqrt(std::max(0.0, cov(0, 0)));
    out.se_b = std::sqrt(std::max(0.0, cov(1, 1)));
    out.se_c = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return out;
}

PowerLawFit fit_power_law(const TimeSeries& series, SeriesColumn column) {
  std::vector<double> t = series.times();
  for (double& v : t) v += 1.0;
  const auto y = column == SeriesColumn::Depth ? series.depths() : series.widths();
  return fit_power_law(t, y);
}

}  // namespace fit
}  // namespace pitmesh
