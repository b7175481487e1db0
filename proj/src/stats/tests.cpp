#include "pairit/stats/tests.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>

#include "pairit/core/error.hpp"
#include "pairit/stats/linear_model.hpp"

namespace pairit::stats {

namespace {

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double ss(const std::vector<double>& v, double m) {
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

}  // namespace

TTest two_sample_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::TooFew, "each sample needs at least two values");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  TTest out;
  out.dof = na + nb - 2.0;
  const double pooled = (ss(a, ma) + ss(b, mb)) / out.dof;
  out.diff = ma - mb;
  out.se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  if (out.se == 0.0) {
    out.t = out.diff == 0.0 ? 0.0 : std::copysign(INFINITY, out.diff);
  } else {
    out.t = out.diff / out.se;
  }
  out.p = out.diff == 0.0 ? 1.0 : t_pvalue(out.t, out.dof);
  return out;
}

Anova anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorCode::DegenerateGroups, "need at least two groups");
  double n = 0, total = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::DegenerateGroups, "empty group");
    n += static_cast<double>(g.size());
    for (double x : g) total += x;
  }
  const double k = static_cast<double>(groups.size());
  if (n <= k) throw Error(ErrorCode::DegenerateGroups, "no within-group degrees of freedom");
  const double grand = total / n;
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    ssw += ss(g, m);
  }
  if (ssw == 0.0) throw Error(ErrorCode::DegenerateGroups, "zero within-group variance");
  Anova out;
  out.dfBetween = k - 1.0;
  out.dfWithin = n - k;
  out.F = (ssb / out.dfBetween) / (ssw / out.dfWithin);
  out.p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(out.dfBetween, out.dfWithin), out.F));
  return out;
}

}  // namespace pairit::stats
