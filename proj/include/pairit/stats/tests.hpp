#pragma once

#include <vector>

namespace pairit::stats {

struct TTest {
  double t = 0;
  double se = 0;
  double dof = 0;
  double p = 1;
  double diff = 0;  // mean(a) - mean(b)
};

// Pooled-variance two-sample t test. Throws TooFew when either side has < 2.
TTest two_sample_t(const std::vector<double>& a, const std::vector<double>& b);

struct Anova {
  double F = 0;
  double dfBetween = 0;
  double dfWithin = 0;
  double p = 1;
};

// Classical one-way ANOVA. Throws DegenerateGroups for fewer than two groups,
// an empty group, no within-group dof, or zero within-group variance.
Anova anova_oneway(const std::vector<std::vector<double>>& groups);

}  // namespace pairit::stats
