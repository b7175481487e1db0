#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pairit::stats {

struct DesignMatrix {
  Eigen::MatrixXd X;               // includes the intercept column when wanted
  Eigen::VectorXd y;
  std::vector<std::string> names;  // one per column of X
  std::vector<std::int64_t> clusters;  // empty, or one id per row
  std::vector<std::int64_t> groups;    // random-intercept grouping, same rule

  // Throws InvalidSample on NaN cells or mismatched sizes.
  void check() const;
};

enum class CovType { HC1, CR1, MixedRE };

struct ModelFit {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::MatrixXd cov;
  CovType covType = CovType::HC1;
  Eigen::Index n = 0;
  double dof = 0;            // degrees of freedom used for p-values
  double conditionNumber = 0;
  double sigma2u = 0;        // mixed only
  double sigma2e = 0;        // mixed: residual variance; OLS: e'e/(n-k)
  bool boundary = false;     // mixed: sigma2u pinned at 0
  bool zeroVarianceOutcome = false;
  Eigen::Index clusters = 0;
  Eigen::VectorXd residuals;

  Eigen::Index index(const std::string& name) const;  // throws MissingColumn
  double coef_of(const std::string& name) const { return coef(index(name)); }
  double se_of(const std::string& name) const { return se(index(name)); }
  double t_of(const std::string& name) const;
  double p_of(const std::string& name) const;  // two-sided, Student t with `dof`
};

// OLS via column-pivoted QR with HC1 standard errors.
// Throws TooFewRows (n <= k), RankDeficient.
ModelFit ols(const DesignMatrix& d);

// OLS with CR1 cluster-robust standard errors; p-values use G - 1 dof.
// Throws SingleCluster.
ModelFit ols_cluster(const DesignMatrix& d);

// Linear mixed model with one random intercept per group, fitted by REML.
// Fixed-effect covariance is the GLS covariance at the estimated components.
// Throws DegenerateGroups (< 2 groups), NonConvergence.
ModelFit mixed_random_intercept(const DesignMatrix& d);

// Profiled restricted log-likelihood (up to a constant) at variance ratio
// lambda = sigma2u / sigma2e. Exposed for testing.
double reml_profile(const DesignMatrix& d, double lambda);

// Two-sided p-value of a t statistic.
double t_pvalue(double t, double dof);

}  // namespace pairit::stats
