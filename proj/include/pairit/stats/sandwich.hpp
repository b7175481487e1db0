#pragma once

#include <Eigen/Core>
#include <vector>

namespace pairit::stats {

// Heteroskedasticity meat: sum_i x_i x_i' e_i^2.
template <typename DerivedX, typename DerivedE>
Eigen::MatrixXd hc_meat(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedE>& e) {
  const Eigen::MatrixXd Xe = X.derived().array().colwise() * e.derived().array();
  return Xe.transpose() * Xe;
}

// Cluster meat: sum_g (X_g' e_g)(X_g' e_g)'. `cluster` holds dense indices
// in [0, G).
template <typename DerivedX, typename DerivedE>
Eigen::MatrixXd cluster_meat(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedE>& e,
                             const std::vector<Eigen::Index>& cluster, Eigen::Index G) {
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(G, X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) scores.row(cluster[i]) += e(i) * X.row(i);
  return scores.transpose() * scores;
}

// bread * meat * bread', symmetrized against round-off.
template <typename DerivedB, typename DerivedM>
Eigen::MatrixXd sandwich(const Eigen::MatrixBase<DerivedB>& bread, const Eigen::MatrixBase<DerivedM>& meat) {
  Eigen::MatrixXd V = bread * meat * bread.transpose();
  return 0.5 * (V + V.transpose());
}

}  // namespace pairit::stats
