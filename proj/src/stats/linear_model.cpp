#include "pairit/stats/linear_model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "pairit/core/error.hpp"
#include "pairit/stats/sandwich.hpp"

namespace pairit::stats {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Maps arbitrary ids to 0..G-1 in order of first appearance.
std::vector<Index> dense_ids(const std::vector<std::int64_t>& ids, Index& G) {
  std::unordered_map<std::int64_t, Index> seen;
  std::vector<Index> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, fresh] = seen.try_emplace(ids[i], static_cast<Index>(seen.size()));
    out[i] = it->second;
  }
  G = static_cast<Index>(seen.size());
  return out;
}

struct QrFit {
  VectorXd coef;
  MatrixXd bread;  // (X'X)^-1
  double cond = 0;
};

QrFit qr_fit(const DesignMatrix& d) {
  const Index n = d.X.rows(), k = d.X.cols();
  if (n <= k) throw Error(ErrorCode::TooFewRows, std::to_string(n) + " rows for " + std::to_string(k) + " columns");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(d.X.rows(), d.X.cols());
  // Relative pivot threshold: exact collinearity in floating point leaves
  // pivots well above machine epsilon, so the default is too strict.
  qr.setThreshold(1e-9);
  qr.compute(d.X);
  if (qr.rank() < k) {
    std::string dropped;
    for (Index j = qr.rank(); j < k; ++j) {
      const auto col = qr.colsPermutation().indices()(j);
      if (!dropped.empty()) dropped += ", ";
      dropped += col < static_cast<Index>(d.names.size()) ? d.names[col] : std::to_string(col);
    }
    throw Error(ErrorCode::RankDeficient, "collinear columns: " + dropped);
  }
  QrFit out;
  out.coef = qr.solve(d.y);
  const MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
  const MatrixXd P = qr.colsPermutation();
  out.bread = P * (Rinv * Rinv.transpose()) * P.transpose();
  const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(R).singularValues();
  out.cond = sv(0) / sv(sv.size() - 1);
  return out;
}

ModelFit base_fit(const DesignMatrix& d, const QrFit& q) {
  ModelFit f;
  f.names = d.names;
  f.coef = q.coef;
  f.n = d.X.rows();
  f.conditionNumber = q.cond;
  f.residuals = d.y - d.X * q.coef;
  f.sigma2e = f.residuals.squaredNorm() / static_cast<double>(d.X.rows() - d.X.cols());
  f.zeroVarianceOutcome = d.y.size() > 0 && d.y.maxCoeff() == d.y.minCoeff();
  return f;
}

void finish_se(ModelFit& f) {
  f.se = f.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

// Per-group sufficient statistics for the random-intercept likelihood.
struct GroupStats {
  Index n = 0, k = 0, G = 0;
  MatrixXd XtX;
  VectorXd Xty;
  double yty = 0;
  VectorXd ng;  // rows per group
  MatrixXd S;   // k x G column sums of X per group
  VectorXd T;   // sum of y per group
};

GroupStats group_stats(const DesignMatrix& d) {
  GroupStats s;
  s.n = d.X.rows();
  s.k = d.X.cols();
  const auto g = dense_ids(d.groups, s.G);
  s.XtX = d.X.transpose() * d.X;
  s.Xty = d.X.transpose() * d.y;
  s.yty = d.y.squaredNorm();
  s.ng = VectorXd::Zero(s.G);
  s.S = MatrixXd::Zero(s.k, s.G);
  s.T = VectorXd::Zero(s.G);
  for (Index i = 0; i < s.n; ++i) {
    s.ng(g[i]) += 1;
    s.S.col(g[i]) += d.X.row(i).transpose();
    s.T(g[i]) += d.y(i);
  }
  return s;
}

struct RemlPoint {
  double loglik = -std::numeric_limits<double>::infinity();
  VectorXd beta;
  MatrixXd Ainv;
  double sigma2 = 0;
};

// V = sigma2 (I + lambda Z Z'). With w_g = lambda / (1 + lambda n_g),
// X'H^-1X = X'X - sum_g w_g s_g s_g', and likewise for X'H^-1y and y'H^-1y.
RemlPoint reml_at(const GroupStats& s, double lambda) {
  const VectorXd w = (lambda / (1.0 + lambda * s.ng.array())).matrix();
  const MatrixXd A = s.XtX - s.S * w.asDiagonal() * s.S.transpose();
  const VectorXd b = s.Xty - s.S * (w.array() * s.T.array()).matrix();
  const double c = s.yty - (w.array() * s.T.array().square()).sum();
  Eigen::LDLT<MatrixXd> ldlt(A);
  RemlPoint out;
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return out;
  const VectorXd diag = ldlt.vectorD();
  if ((diag.array() <= 0).any()) return out;
  out.beta = ldlt.solve(b);
  const double rHr = c - b.dot(out.beta);
  const double dof = static_cast<double>(s.n - s.k);
  out.sigma2 = rHr / dof;
  if (!(out.sigma2 > 0)) return out;
  const double logdetH = (1.0 + lambda * s.ng.array()).log().sum();
  const double logdetA = diag.array().log().sum();
  out.loglik = -0.5 * (dof * std::log(out.sigma2) + logdetH + logdetA);
  out.Ainv = ldlt.solve(MatrixXd::Identity(s.k, s.k));
  return out;
}

}  // namespace

void DesignMatrix::check() const {
  if (X.rows() != y.size()) throw Error(ErrorCode::InvalidSample, "X and y row counts differ");
  if (static_cast<Index>(names.size()) != X.cols()) throw Error(ErrorCode::InvalidSample, "one name per column required");
  if (!clusters.empty() && static_cast<Index>(clusters.size()) != X.rows())
    throw Error(ErrorCode::InvalidSample, "cluster ids must cover every row");
  if (!groups.empty() && static_cast<Index>(groups.size()) != X.rows())
    throw Error(ErrorCode::InvalidSample, "group ids must cover every row");
  if (!X.allFinite() || !y.allFinite()) throw Error(ErrorCode::InvalidSample, "non-finite cell in design");
}

Eigen::Index ModelFit::index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw Error(ErrorCode::MissingColumn, name);
}

double ModelFit::t_of(const std::string& name) const {
  const auto i = index(name);
  return coef(i) / se(i);
}

double ModelFit::p_of(const std::string& name) const { return t_pvalue(t_of(name), dof); }

double t_pvalue(double t, double dof) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double a = std::abs(t);
  if (dof > 1e7) return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), a));
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(dof), a));
}

ModelFit ols(const DesignMatrix& d) {
  d.check();
  const auto q = qr_fit(d);
  ModelFit f = base_fit(d, q);
  const double n = static_cast<double>(d.X.rows()), k = static_cast<double>(d.X.cols());
  f.covType = CovType::HC1;
  f.cov = (n / (n - k)) * sandwich(q.bread, hc_meat(d.X, f.residuals));
  f.dof = n - k;
  finish_se(f);
  return f;
}

ModelFit ols_cluster(const DesignMatrix& d) {
  d.check();
  if (d.clusters.empty()) throw Error(ErrorCode::SingleCluster, "no cluster ids");
  Index G = 0;
  const auto cl = dense_ids(d.clusters, G);
  if (G < 2) throw Error(ErrorCode::SingleCluster, "need at least two clusters");
  const auto q = qr_fit(d);
  ModelFit f = base_fit(d, q);
  const double n = static_cast<double>(d.X.rows()), k = static_cast<double>(d.X.cols());
  const double g = static_cast<double>(G);
  const double factor = g / (g - 1.0) * (n - 1.0) / (n - k);
  f.covType = CovType::CR1;
  f.cov = factor * sandwich(q.bread, cluster_meat(d.X, f.residuals, cl, G));
  f.dof = g - 1.0;
  f.clusters = G;
  finish_se(f);
  return f;
}

double reml_profile(const DesignMatrix& d, double lambda) {
  d.check();
  return reml_at(group_stats(d), lambda).loglik;
}

ModelFit mixed_random_intercept(const DesignMatrix& d) {
  d.check();
  if (d.groups.empty()) throw Error(ErrorCode::DegenerateGroups, "no group ids");
  const auto q = qr_fit(d);  // rank and row checks
  const auto s = group_stats(d);
  if (s.G < 2) throw Error(ErrorCode::DegenerateGroups, "need at least two groups");

  // Coarse grid over theta = log(lambda), then Brent inside the best bracket.
  constexpr double lo = -16.0, hi = 9.0;
  constexpr int steps = 50;
  std::vector<double> theta(steps + 1), value(steps + 1);
  std::ostringstream trace;
  int best = 0;
  for (int i = 0; i <= steps; ++i) {
    theta[i] = lo + (hi - lo) * i / steps;
    value[i] = reml_at(s, std::exp(theta[i])).loglik;
    if (value[i] > value[best]) best = i;
  }
  const double a = theta[std::max(best - 1, 0)];
  const double b = theta[std::min(best + 1, steps)];
  std::uintmax_t iters = 200;
  auto neg = [&](double th) {
    const double v = reml_at(s, std::exp(th)).loglik;
    trace << "theta=" << th << " loglik=" << v << "; ";
    return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
  };
  const auto [theta_hat, neg_ll] = boost::math::tools::brent_find_minima(neg, a, b, 52, iters);
  if (iters >= 200 || !std::isfinite(neg_ll)) {
    throw Error(ErrorCode::NonConvergence, "REML search did not converge: " + trace.str());
  }

  double lambda = std::exp(theta_hat);
  RemlPoint at = reml_at(s, lambda);
  const RemlPoint zero = reml_at(s, 0.0);
  bool boundary = false;
  if (zero.loglik >= at.loglik - 1e-9) {
    at = zero;
    lambda = 0.0;
    boundary = true;
  }
  if (!std::isfinite(at.loglik)) throw Error(ErrorCode::NonConvergence, "REML objective is not finite");

  ModelFit f = base_fit(d, q);
  f.coef = at.beta;
  f.residuals = d.y - d.X * f.coef;
  f.covType = CovType::MixedRE;
  f.sigma2e = at.sigma2;
  f.sigma2u = lambda * at.sigma2;
  f.boundary = boundary;
  f.cov = at.sigma2 * at.Ainv;
  f.dof = static_cast<double>(s.n - s.k);
  f.clusters = s.G;
  finish_se(f);
  return f;
}

}  // namespace pairit::stats
