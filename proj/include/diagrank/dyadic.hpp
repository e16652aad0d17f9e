#pragma once

// The dyadic lattice construction: a bounded real sequence r_n dense in
// [-1,1] organized in levels S_m = {2^m + k : 0 <= k < 2^m}, paired with
// level-constant coefficients gamma_m chosen square-summable against 2^m
// weights while m*2^m*gamma_m^2 diverges. This is the obstruction example
// driving the `counterexample` CLI subcommand and the dyadic_section3
// sequence rule.

#include <optional>
#include <vector>

#include "diagrank/common.hpp"

namespace diagrank::dyadic {

// Level m of index n >= 1: the unique m with 2^m <= n < 2^{m+1}.
int level_of(int64_t n);

// r_{2^m+k} = -1 + 2^{-m} + k*2^{1-m} = (2k+1-2^m)/2^m, a dyadic rational
// with odd numerator. Exact in double for every level reachable in memory.
double r_value(int64_t n);

// Exact rational form (numerator, level): r_n = num / 2^level, num odd.
struct DyadicRational {
  int64_t num;
  int level;
};
DyadicRational r_exact(int64_t n);

// gamma_0 = gamma_1 = 0, gamma_m = 1/(2^{m/2} sqrt(m) log m) for m >= 2,
// natural logarithm. Scaled via ldexp so 2^m*gamma_m^2 = 1/(m log^2 m)
// holds to a few ulp.
double gamma_coeff(int level);

// Coefficient of the construction: alpha_n = gamma_{level(n)}.
double alpha_value(int64_t n);

// Nonincreasing envelope for |alpha_n| (the zero head levels are capped
// by gamma_2) and a certified tail of sum_{n>M} envelope(n)^2 by the
// integral test on sum 1/(m log^2 m).
double alpha_envelope(int64_t n);
double alpha_tail_sq(int64_t m_terms);

struct LevelGrowthRow {
  int level;
  double l2_partial;        // sum_{m<=level} 2^m gamma_m^2
  double weighted_partial;  // sum_{m<=level} m 2^m gamma_m^2
};

struct L2DivergenceReport {
  std::vector<LevelGrowthRow> rows;
  double l2_certified_bound;         // integral-test bound on the full sum
  double divergence_threshold;       // preset threshold (10 by default)
  std::optional<int> threshold_level;  // first level crossing it, if reached
};

// Partial sums of sum 2^m gamma_m^2 (bounded, certified) against
// sum m 2^m gamma_m^2 (monotone divergent; increments 1/log^2 m).
L2DivergenceReport verify_l2_vs_divergence(int max_level,
                                           double threshold = 10.0);

struct DivergenceWitness {
  double x = 0.0;
  int levels = 0;
  double partial_sum = 0.0;        // exact partial of phi over levels <= M
  double paper_lower_bound = 0.0;  // log 2 * sum gamma_m^2 2^{m-1}(m-1)
  std::vector<std::pair<int, int64_t>> k0_trace;
  std::vector<double> level_partial;      // phi partial after each level
  std::vector<double> level_lower_bound;  // bound partial after each level
  bool insufficient_depth = false;  // no level resolves x yet
  std::optional<int64_t> exact_hit;  // index n with r_n == x, gamma != 0
};

// phi(x) = sum alpha_n^2 / |r_n - x| summed over complete levels <= max_level,
// with the bracketing index k0(m) per level and the analytic lower-bound
// chain evaluated alongside. Requires x in (-1,1).
DivergenceWitness phi_partial(double x, int max_level);

// First level at which the analytic lower bound for phi(0) exceeds the
// given threshold. Closed-form increments; no term enumeration.
int lower_bound_crossing_level(double threshold);

}  // namespace diagrank::dyadic
