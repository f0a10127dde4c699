#pragma once

// Independent reference computations used only by tests. None of these call
// into the library; they use the slow, obvious formulation on purpose.

#include <cmath>
#include <cstddef>
#include <vector>

namespace taskfilter::oracle {

// Count of (b, m) pairs with m > b over all pairs.
inline double pair_fraction(const std::vector<double>& base,
                            const std::vector<double>& mod) {
  std::size_t wins = 0;
  for (double b : base) {
    for (double m : mod) wins += (m > b) ? 1 : 0;
  }
  return static_cast<double>(wins) /
         static_cast<double>(base.size() * mod.size());
}

// O(n^2) average-tie ranks: 1 + #smaller + (#equal others) / 2.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double smaller = 0.0, equal_others = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) smaller += 1.0;
      else if (j != i && x[j] == x[i]) equal_others += 1.0;
    }
    r[i] = 1.0 + smaller + 0.5 * equal_others;
  }
  return r;
}

// Raw-moment Pearson in long double: (n Sxy - Sx Sy) / sqrt(...).
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long double n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double vx = n * sxx - sx * sx;
  const long double vy = n * syy - sy * sy;
  if (vx <= 0 || vy <= 0) return 0.0;
  return static_cast<double>((n * sxy - sx * sy) / std::sqrt(vx * vy));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

struct WelchStat {
  double t;
  double dof;
};

// Textbook Welch statistic and Welch-Satterthwaite degrees of freedom.
inline WelchStat welch(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto var = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double s1 = var(a) / na;
  const double s2 = var(b) / nb;
  const double t = (mean(a) - mean(b)) / std::sqrt(s1 + s2);
  const double dof = (s1 + s2) * (s1 + s2) /
                     (s1 * s1 / (na - 1.0) + s2 * s2 / (nb - 1.0));
  return {t, dof};
}

inline double log_loss(double y, double t) {
  return t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
}

// Two-sample KS by evaluating both empirical CDFs at every sample point.
inline double ks(const std::vector<double>& a, const std::vector<double>& b) {
  auto cdf = [](const std::vector<double>& v, double x) {
    double c = 0;
    for (double u : v) c += (u <= x) ? 1.0 : 0.0;
    return c / static_cast<double>(v.size());
  };
  double d = 0;
  for (const auto* v : {&a, &b}) {
    for (double x : *v) d = std::max(d, std::fabs(cdf(a, x) - cdf(b, x)));
  }
  return d;
}

}  // namespace taskfilter::oracle
