#pragma once

// Operator specs T = D + sum_k u_k (x) v_k: a bounded diagonal sequence
// plus finitely many coefficient-sequence pairs, with validation, class
// membership checks, dense truncations and the JSON document format.

#include <set>
#include <string>
#include <vector>

#include "diagrank/sequences.hpp"

namespace diagrank {

struct PerturbationPair {
  CoefficientSequence u;
  CoefficientSequence v;
};

struct L2Certificate {
  std::string sequence;  // "u_1", "v_2", ...
  double bound;          // certified sum |c_n|^2
};

class OperatorSpec {
 public:
  OperatorSpec(DiagonalSequence diag, std::vector<PerturbationPair> pairs,
               std::vector<L2Certificate> certs)
      : diag_(std::move(diag)),
        pairs_(std::move(pairs)),
        l2_(std::move(certs)) {}

  const DiagonalSequence& diag() const { return diag_; }
  int rank() const { return static_cast<int>(pairs_.size()); }
  const PerturbationPair& pair(int k) const {
    return pairs_[static_cast<size_t>(k)];
  }
  const std::vector<PerturbationPair>& pairs() const { return pairs_; }
  const std::vector<L2Certificate>& l2_certificates() const { return l2_; }

  // Effective summation length: finite diagonal length, else unbounded.
  int64_t series_length() const { return diag_.length(); }

 private:
  DiagonalSequence diag_;
  std::vector<PerturbationPair> pairs_;
  std::vector<L2Certificate> l2_;
};

// Validates and assembles a spec. Rejects unbounded diagonals, zero
// perturbation vectors, rule coefficients without a usable tail majorant
// and misaligned finite lengths.
OperatorSpec build_operator_spec(DiagonalSequence diag,
                                 std::vector<PerturbationPair> pairs);

enum class ROCondition { coeff_support, multiplicity, derived_set };

struct ROClassification {
  bool in_class = false;
  std::set<ROCondition> failed_conditions;
  std::string notes;
  int64_t probe_depth = 0;
};

std::string ro_condition_str(ROCondition c);

// Checks the nondegeneracy conditions on the first probe_depth indices:
// (i) joint coefficient support, (ii) diagonal multiplicity <= rank,
// (iii) at least two accumulation-point candidates. Finite lists report
// (iii) as undecidable instead of failing it.
ROClassification classify_ro(const OperatorSpec& spec, int64_t probe_depth);

struct DenseMatrix {
  int64_t n = 0;
  std::vector<complex> a;  // row-major

  DenseMatrix() = default;
  explicit DenseMatrix(int64_t dim)
      : n(dim), a(static_cast<size_t>(dim * dim), complex{0.0, 0.0}) {}
  complex& at(int64_t i, int64_t j) {
    return a[static_cast<size_t>(i * n + j)];
  }
  complex at(int64_t i, int64_t j) const {
    return a[static_cast<size_t>(i * n + j)];
  }
};

// Compression of the operator to the first dim basis vectors:
// entry (i,j) = lambda_i delta_ij + sum_k alpha_i^{(k)} conj(beta_j^{(k)}).
DenseMatrix truncate(const OperatorSpec& spec, int64_t dim);

// JSON document format (see schemas/operator_spec.schema.json).
OperatorSpec spec_from_json(const std::string& text);
std::string spec_to_json(const OperatorSpec& spec);

}  // namespace diagrank
