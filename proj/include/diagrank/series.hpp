#pragma once

// Certified evaluation of the scalar series attached to an operator spec:
// the rank-one secular series f(z), its N x N matrix version with
// determinant, the eigen-range series, the relevant-set and log-square
// series over real abscissas, and the summability-condition hierarchy.
//
// Verdicts are certified only through recorded majorant arguments:
// finite (or effectively finite) support, positive tail-distance bounds
// combined with square-summable envelopes, exact pole hits, or analytic
// divergence chains for the built-in rules. Anything else is reported
// inconclusive with the partial sums.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "diagrank/operator_model.hpp"

namespace diagrank {

enum class SeriesVerdict {
  converges_certified,
  diverges_certified,
  inconclusive,
};

std::string series_verdict_str(SeriesVerdict v);

struct SeriesValue {
  complex partial_sum{0.0, 0.0};
  int64_t terms_used = 0;
  // Certified bound on |true value - partial_sum|; +inf means unknown.
  double tail_bound = std::numeric_limits<double>::infinity();
  SeriesVerdict verdict = SeriesVerdict::inconclusive;
  std::string witness;

  bool tail_known() const { return std::isfinite(tail_bound); }
};

struct EvalOptions {
  double tol = 1e-10;                  // stop refining once tail <= tol
  int64_t term_budget = 100'000'000;   // per series
  double divergence_threshold = 1e6;   // monotone-witness threshold
};

// f(z) = sum alpha_n conj(beta_n) / (lambda_n - z), rank one only.
// Exact diagonal hits raise a pole error.
SeriesValue eval_borel(const OperatorSpec& spec, complex z,
                       const EvalOptions& opt = {});

// Plain (uncertified) derivative sum_n w_n/(lambda_n - z)^2 over the first
// `terms` indices; used by Newton refinement.
complex borel_derivative(const OperatorSpec& spec, complex z, int64_t terms);

struct BorelMatrixValue {
  int n = 0;
  std::vector<SeriesValue> entries;  // row-major f^{(i,j)}(z)
  complex determinant{0.0, 0.0};     // det(I + entries)
  double det_error_bound = std::numeric_limits<double>::infinity();

  const SeriesValue& entry(int i, int j) const {
    return entries[static_cast<size_t>(i * n + j)];
  }
};

BorelMatrixValue eval_borel_matrix(const OperatorSpec& spec, complex z,
                                   const EvalOptions& opt = {});

// A family of related series (one per sequence) plus an aggregate whose
// tail_bound is the worst per-sequence tail.
struct PerSequenceSeries {
  std::vector<std::string> names;
  std::vector<SeriesValue> values;
  SeriesValue aggregate;
};

// sum |alpha_n^{(k)}|^2 / |z - lambda_n|^2 for each k.
PerSequenceSeries ionascu_range_series(const OperatorSpec& spec, complex z,
                                       const EvalOptions& opt = {});

// sum (|alpha_n^{(k)}|^2 + |beta_n^{(k)}|^2) / |Re lambda_n - x| combined
// over all k; exact real-part hits with a nonzero coefficient certify
// divergence immediately.
PerSequenceSeries relevant_set_series(const OperatorSpec& spec, double x,
                                      const EvalOptions& opt = {});

// sum (log |Re lambda_n - x|)^2 |alpha_n^{(k)}|^2 per k; exact hits with a
// nonzero coefficient raise a pole error.
PerSequenceSeries log_square_series(const OperatorSpec& spec, double x,
                                    const EvalOptions& opt = {});

enum class SummabilityCondition { fjkp_23, fx_1, gg_either, log_cond, pq };

std::string summability_condition_str(SummabilityCondition c);

struct SummabilityReport {
  SummabilityCondition condition = SummabilityCondition::log_cond;
  double p = 0.0, q = 0.0;  // pq condition only
  SeriesVerdict verdict = SeriesVerdict::inconclusive;
  std::vector<std::string> names;
  std::vector<SumDecision> details;
  std::string note;
};

SummabilityReport check_summability(const OperatorSpec& spec,
                                    SummabilityCondition condition,
                                    double p = 0.0, double q = 0.0);

enum class RegionTag { FJKP, FX, GG, MAIN, UNCOVERED };

std::string region_tag_str(RegionTag t);

// Strongest theorem covering the exponent pair (p,q) in (0,2]^2; the
// excluded edge pairs {(2,r),(r,2): r in (1,2]} are UNCOVERED.
RegionTag theorem_region_membership(double p, double q);

// Index n with r_n == x exactly on the dyadic lattice, when x is a
// representable dyadic rational in (-1,1) of level <= 62.
std::optional<int64_t> dyadic_grid_index(double x);

}  // namespace diagrank
