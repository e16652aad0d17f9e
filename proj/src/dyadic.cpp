#include "diagrank/dyadic.hpp"

#include <cmath>
#include <limits>

namespace diagrank::dyadic {

int level_of(int64_t n) {
  if (n < 1) fail(ErrorKind::invalid_argument, "dyadic index must be >= 1");
  int m = 0;
  while ((int64_t{1} << (m + 1)) <= n) ++m;
  return m;
}

DyadicRational r_exact(int64_t n) {
  int m = level_of(n);
  int64_t k = n - (int64_t{1} << m);
  // (2k+1) - 2^m is odd, so the fraction is already in lowest terms and
  // distinct (m,k) pairs give distinct values.
  return DyadicRational{2 * k + 1 - (int64_t{1} << m), m};
}

double r_value(int64_t n) {
  DyadicRational q = r_exact(n);
  return std::ldexp(static_cast<double>(q.num), -q.level);
}

double gamma_coeff(int level) {
  if (level < 0) fail(ErrorKind::invalid_argument, "gamma level must be >= 0");
  if (level < 2) return 0.0;
  double m = static_cast<double>(level);
  double g = 1.0 / (std::sqrt(m) * std::log(m));
  if (level % 2 == 0) return std::ldexp(g, -level / 2);
  return std::ldexp(g / std::sqrt(2.0), -(level - 1) / 2);
}

double alpha_value(int64_t n) { return gamma_coeff(level_of(n)); }

double alpha_envelope(int64_t n) {
  int m = level_of(n);
  return gamma_coeff(m < 2 ? 2 : m);
}

double alpha_tail_sq(int64_t m_terms) {
  if (m_terms < 0) m_terms = 0;
  // Envelope is constant per level, so bound the tail by whole levels
  // starting at the level containing index m_terms+1.
  int m0 = level_of(m_terms + 1);
  if (m0 < 2) m0 = 2;
  // sum_{m>=m0} 2^m gamma_m^2 = sum_{m>=m0} 1/(m log^2 m)
  //   <= 1/(m0 log^2 m0) + integral_{m0}^inf dt/(t log^2 t)
  //    = 1/(m0 log^2 m0) + 1/log m0.
  double lm = std::log(static_cast<double>(m0));
  double head = 1.0 / (static_cast<double>(m0) * lm * lm);
  // Levels below m0 partially counted: the envelope on the remainder of
  // level m0 is gamma_{m0}; the whole-level bound above already covers it.
  return head + 1.0 / lm;
}

L2DivergenceReport verify_l2_vs_divergence(int max_level, double threshold) {
  if (max_level < 3)
    fail(ErrorKind::invalid_argument, "verify_l2_vs_divergence: max_level >= 3");
  L2DivergenceReport rep;
  rep.divergence_threshold = threshold;
  double llog2 = std::log(2.0);
  rep.l2_certified_bound = 1.0 / (2.0 * llog2 * llog2) + 1.0 / llog2;
  CompensatedSum l2, weighted;
  for (int m = 0; m <= max_level; ++m) {
    if (m >= 2) {
      double lm = std::log(static_cast<double>(m));
      double inc = 1.0 / (static_cast<double>(m) * lm * lm);  // 2^m gamma_m^2
      l2.add(inc);
      weighted.add(1.0 / (lm * lm));  // m 2^m gamma_m^2
    }
    rep.rows.push_back({m, l2.value(), weighted.value()});
    if (!rep.threshold_level && weighted.value() >= threshold)
      rep.threshold_level = m;
  }
  return rep;
}

DivergenceWitness phi_partial(double x, int max_level) {
  if (!(x > -1.0 && x < 1.0))
    fail(ErrorKind::invalid_argument, "phi_partial: x must lie in (-1,1)");
  if (max_level < 0)
    fail(ErrorKind::invalid_argument, "phi_partial: max_level >= 0");

  DivergenceWitness w;
  w.x = x;
  w.levels = max_level;
  // The analytic chain is stated for x <= 0; level sums are symmetric in x,
  // so the bracketing runs at -|x| while phi itself is summed at x.
  double xb = x > 0 ? -x : x;
  const double log2v = std::log(2.0);

  CompensatedSum phi, lb;
  bool any_level_resolved = false;
  for (int m = 0; m <= max_level; ++m) {
    double g = gamma_coeff(m);
    double g2 = g * g;
    int64_t width = int64_t{1} << m;
    if (g2 > 0.0) {
      double inv_denom = std::ldexp(1.0, -m);  // 2^{-m}
      CompensatedSum level_sum;
      for (int64_t k = 0; k < width; ++k) {
        double r = static_cast<double>(2 * k + 1 - width) * inv_denom;
        double d = std::abs(r - x);
        if (d == 0.0) {
          w.exact_hit = width + k;
          w.partial_sum = std::numeric_limits<double>::infinity();
          return w;
        }
        level_sum.add(1.0 / d);
      }
      phi.add(g2 * level_sum.value());
    }
    // Lower-bound chain: active once -1 + 2^{-m} < xb and gamma_m != 0.
    if (m >= 2 && -1.0 + std::ldexp(1.0, -m) < xb) {
      any_level_resolved = true;
      double pos = (xb + 1.0 - std::ldexp(1.0, -m)) * std::ldexp(1.0, m - 1);
      int64_t k0 = static_cast<int64_t>(std::floor(pos)) + 1;
      w.k0_trace.emplace_back(m, k0);
      lb.add(log2v * g2 * std::ldexp(1.0, m - 1) * (m - 1));
    }
    w.level_partial.push_back(phi.value());
    w.level_lower_bound.push_back(lb.value());
  }
  w.partial_sum = phi.value();
  w.paper_lower_bound = lb.value();
  w.insufficient_depth = !any_level_resolved;
  return w;
}

int lower_bound_crossing_level(double threshold) {
  const double log2v = std::log(2.0);
  CompensatedSum lb;
  for (int m = 2; m < 1 << 24; ++m) {
    double lm = std::log(static_cast<double>(m));
    lb.add(log2v * (m - 1) / (2.0 * m * lm * lm));
    if (lb.value() >= threshold) return m;
  }
  fail(ErrorKind::budget, "lower_bound_crossing_level: threshold not reached");
}

}  // namespace diagrank::dyadic
