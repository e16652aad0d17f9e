#pragma once

// Diagonal and coefficient sequences: finite lists or rule-generated
// closures over the index. Rule sequences carry tail majorants so series
// verdicts can be certified instead of merely sampled. Built-in rules:
//   dyadic_section3       — the dyadic lattice r_n / level coefficients
//   geometric(ratio)      — scale * ratio^n
//   power(exponent)       — scale * n^{-exponent}

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "diagrank/common.hpp"

namespace diagrank {

enum class SeqKind { finite_list, rule_generated };
enum class RuleName { dyadic_section3, geometric, power };

struct RuleSpec {
  RuleName name = RuleName::geometric;
  double ratio = 0.5;     // geometric
  double exponent = 1.0;  // power
  double scale = 1.0;     // geometric, power
};

std::string rule_name_str(RuleName name);

struct DecayClass {
  double exponent = 0.0;  // |c_n| <= scale * n^{-exponent}
  double scale = 1.0;
};

constexpr int64_t kInfiniteLength = std::numeric_limits<int64_t>::max();

// ---------------------------------------------------------------------------
// DiagonalSequence

class DiagonalSequence {
 public:
  static DiagonalSequence finite(std::vector<complex> values);
  static DiagonalSequence rule(const RuleSpec& spec);

  SeqKind kind() const { return kind_; }
  const std::optional<RuleSpec>& rule_spec() const { return rule_; }

  // Number of terms; kInfiniteLength for rule sequences.
  int64_t length() const;

  complex value(int64_t n) const;  // 1-based
  double bound() const { return bound_; }
  bool is_real() const { return real_; }

  // True when the values came from parsed decimal text; equality checks
  // then use a tolerance of 1e-14 * bound instead of exact comparison.
  bool parsed() const { return parsed_; }
  void mark_parsed() { parsed_ = true; }

  // lambda_n -> scale * lambda_n + shift with real scale > 0. Finite lists
  // are rewritten in place; rule sequences carry the map on top of the
  // rule so tail majorants transform exactly.
  DiagonalSequence affine_image(double scale, complex shift) const;
  double affine_scale() const { return affine_scale_; }
  complex affine_shift() const { return affine_shift_; }

  // Rule is the raw dyadic lattice with no affine map applied.
  bool pure_dyadic() const;
  // Dyadic rule up to an affine map; *scale/*shift receive the map.
  bool dyadic_up_to_affine(double* scale, complex* shift) const;

  // sup_{n>M} |lambda_n| via the rule's monotone majorant.
  double tail_abs_sup(int64_t m_terms) const;

  // Certified lower bound on inf_{n>M} |lambda_n - z|; 0 when unknown.
  // +inf when the tail is empty (finite lists).
  double tail_dist(complex z, int64_t m_terms) const;

  // Certified lower bound on inf_{n>M} |Re lambda_n - x|; 0 when unknown.
  double tail_re_dist(double x, int64_t m_terms) const;

  const std::vector<complex>& finite_values() const { return values_; }

 private:
  DiagonalSequence() = default;
  double raw_bound() const;  // rule bound before the affine map
  // Raw rule values: certified interval containing every Re lambda_n for
  // n > M before the affine map.
  void tail_re_interval(int64_t m_terms, double* lo, double* hi) const;

  SeqKind kind_ = SeqKind::finite_list;
  std::vector<complex> values_;
  std::optional<RuleSpec> rule_;
  double bound_ = 0.0;
  bool real_ = true;
  bool parsed_ = false;
  double affine_scale_ = 1.0;
  complex affine_shift_{0.0, 0.0};
};

// ---------------------------------------------------------------------------
// CoefficientSequence

class CoefficientSequence {
 public:
  static CoefficientSequence finite(std::vector<complex> values);
  static CoefficientSequence rule(const RuleSpec& spec);

  SeqKind kind() const { return kind_; }
  const std::optional<RuleSpec>& rule_spec() const { return rule_; }
  int64_t length() const;

  complex value(int64_t n) const;  // 1-based

  // Nonincreasing envelope e(n) >= |c_n| on every index.
  double envelope(int64_t n) const;

  // Certified upper bound on sum_{n>M} e(n)^2.
  double tail_sq(int64_t m_terms) const;

  // Index past which the envelope is exactly zero (finite lists: the last
  // nonzero index; geometric rules: double underflow; else kInfiniteLength).
  int64_t support_end() const;

  // Certified upper bound on sum |c_n|^2 (partial + tail).
  double l2_bound() const;

  // True when |c_n| equals envelope(n) exactly for every n past the head
  // (rule sequences with closed-form values); enables certified divergence.
  bool exact_rule() const { return kind_ == SeqKind::rule_generated; }

  bool has_nonzero_term(int64_t probe_depth) const;

  // c_n -> factor * c_n with real factor != 0 (folds into rule scales).
  CoefficientSequence scaled(double factor) const;

  const std::optional<DecayClass>& decay_class() const { return decay_; }
  void set_decay_class(const DecayClass& d) { decay_ = d; }

  const std::vector<complex>& finite_values() const { return values_; }

 private:
  CoefficientSequence() = default;

  SeqKind kind_ = SeqKind::finite_list;
  std::vector<complex> values_;
  std::vector<double> suffix_env_;      // finite lists: suffix max of |c|
  std::vector<double> suffix_sq_;       // finite lists: suffix sums of |c|^2
  std::optional<RuleSpec> rule_;
  std::optional<DecayClass> decay_;
  int64_t support_end_ = 0;
};

// ---------------------------------------------------------------------------
// Closed-form summability decisions on envelopes.
//
// Decides sum_n f(e(n)) for f(t) = t^p or f(t) = t^2 log(1/t) (0 at t = 0),
// with a certified integral-test tail bound when convergent and, for exact
// rules, an analytic divergence witness otherwise.

enum class SumVerdict { converges_certified, diverges_certified, inconclusive };

struct SumDecision {
  SumVerdict verdict = SumVerdict::inconclusive;
  double partial = 0.0;     // compensated partial sum over the head
  int64_t terms = 0;        // head length actually summed
  double tail = 0.0;        // certified tail bound (convergent case)
  std::string witness;      // recorded majorant / divergence argument
};

// f(t) = t^p over the sequence's envelope  (p > 0).
SumDecision decide_power_sum(const CoefficientSequence& seq, double p,
                             int64_t head_terms = 1 << 16);

// f(t) = t^2 log(1/t) over the sequence values (zero terms skipped).
SumDecision decide_sq_log_sum(const CoefficientSequence& seq,
                              int64_t head_terms = 1 << 16);

}  // namespace diagrank
