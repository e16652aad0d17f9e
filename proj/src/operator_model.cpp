#include "diagrank/operator_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace diagrank {

namespace {

void check_decay_class(const CoefficientSequence& seq,
                       const std::string& name) {
  if (!seq.decay_class()) return;
  const DecayClass& d = *seq.decay_class();
  if (d.exponent <= 0.0 || d.scale <= 0.0)
    fail(ErrorKind::contract,
         "decay class on " + name + " needs positive exponent and scale");
  int64_t limit = std::min<int64_t>(seq.length(), 512);
  for (int64_t n = 1; n <= limit; ++n) {
    double env = d.scale * std::pow(static_cast<double>(n), -d.exponent);
    if (std::abs(seq.value(n)) > env * (1.0 + 1e-12))
      fail(ErrorKind::contract,
           "declared decay class violated by " + name + " at index " +
               std::to_string(n));
  }
}

}  // namespace

OperatorSpec build_operator_spec(DiagonalSequence diag,
                                 std::vector<PerturbationPair> pairs) {
  if (pairs.empty())
    fail(ErrorKind::contract, "operator spec needs at least one pair");

  // Diagonal bound holds on all materialized terms.
  int64_t probe = std::min<int64_t>(diag.length(), 1 << 12);
  for (int64_t n = 1; n <= probe; ++n)
    if (std::abs(diag.value(n)) > diag.bound() * (1.0 + 1e-12))
      fail(ErrorKind::contract, "unbounded diagonal: materialized term " +
                                    std::to_string(n) + " exceeds bound");

  std::vector<L2Certificate> certs;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const char* side[2] = {"u", "v"};
    const CoefficientSequence* seqs[2] = {&pairs[k].u, &pairs[k].v};
    for (int s = 0; s < 2; ++s) {
      std::string name =
          std::string(side[s]) + "_" + std::to_string(k + 1);
      const CoefficientSequence& seq = *seqs[s];
      if (!seq.has_nonzero_term(1 << 12))
        fail(ErrorKind::contract, "zero perturbation vector " + name);
      if (seq.kind() == SeqKind::rule_generated) {
        double tail = seq.tail_sq(0);
        if (!std::isfinite(tail))
          fail(ErrorKind::contract,
               "missing tail majorant on rule-generated sequence " + name +
                   ": envelope is not certifiably square-summable");
      }
      if (diag.length() != kInfiniteLength &&
          seq.kind() == SeqKind::finite_list &&
          seq.length() != diag.length())
        fail(ErrorKind::contract,
             "sequence " + name + " is not index-aligned with the diagonal");
      check_decay_class(seq, name);
      certs.push_back({name, seq.l2_bound()});
    }
  }
  return OperatorSpec(std::move(diag), std::move(pairs), std::move(certs));
}

std::string ro_condition_str(ROCondition c) {
  switch (c) {
    case ROCondition::coeff_support: return "coeff-support";
    case ROCondition::multiplicity: return "multiplicity";
    case ROCondition::derived_set: return "derived-set";
  }
  return "?";
}

ROClassification classify_ro(const OperatorSpec& spec, int64_t probe_depth) {
  if (probe_depth < 1)
    fail(ErrorKind::invalid_argument, "probe depth must be >= 1");
  ROClassification out;
  out.probe_depth = probe_depth;
  std::ostringstream notes;
  int64_t limit = std::min(probe_depth, spec.series_length());

  // (i) joint coefficient support on every index.
  int64_t bad_support = 0, first_bad = 0;
  for (int64_t n = 1; n <= limit; ++n) {
    bool has_u = false, has_v = false;
    for (const auto& p : spec.pairs()) {
      if (p.u.value(n) != complex{0.0, 0.0}) has_u = true;
      if (p.v.value(n) != complex{0.0, 0.0}) has_v = true;
    }
    if (!(has_u && has_v)) {
      if (bad_support == 0) first_bad = n;
      ++bad_support;
    }
  }
  if (bad_support > 0) {
    out.failed_conditions.insert(ROCondition::coeff_support);
    notes << "coefficient support fails at " << bad_support
          << " indices (first: n=" << first_bad << "); ";
  }

  // (ii) multiplicity of each diagonal value at most the rank.
  bool tol_compare = spec.diag().kind() == SeqKind::finite_list ||
                     spec.diag().parsed();
  int64_t max_mult = 0;
  if (tol_compare) {
    std::vector<complex> vals;
    vals.reserve(static_cast<size_t>(limit));
    for (int64_t n = 1; n <= limit; ++n) vals.push_back(spec.diag().value(n));
    std::sort(vals.begin(), vals.end(), [](complex a, complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    double tol = 1e-14 * std::max(spec.diag().bound(), 1e-300);
    int64_t run = 1;
    for (size_t i = 1; i < vals.size(); ++i) {
      if (std::abs(vals[i] - vals[i - 1]) <= tol)
        ++run;
      else
        run = 1;
      max_mult = std::max(max_mult, run);
    }
    max_mult = std::max<int64_t>(max_mult, vals.empty() ? 0 : 1);
  } else {
    std::unordered_map<std::uint64_t, std::map<double, int64_t>> buckets;
    for (int64_t n = 1; n <= limit; ++n) {
      complex v = spec.diag().value(n);
      std::uint64_t key;
      double re = v.real();
      std::memcpy(&key, &re, sizeof key);
      int64_t c = ++buckets[key][v.imag()];
      max_mult = std::max(max_mult, c);
    }
  }
  if (max_mult > spec.rank()) {
    out.failed_conditions.insert(ROCondition::multiplicity);
    notes << "a diagonal value repeats " << max_mult
          << " times (rank " << spec.rank() << "); ";
  }

  // (iii) derived set: report candidates, decide only for rule sequences.
  if (spec.diag().kind() == SeqKind::finite_list) {
    notes << "derived set undecidable - finite data; ";
  } else {
    double eps = std::max(spec.diag().bound(), 1.0) * 1e-3;
    std::map<std::pair<int64_t, int64_t>, int64_t> bins;
    for (int64_t n = 1; n <= limit; ++n) {
      complex v = spec.diag().value(n);
      bins[{static_cast<int64_t>(std::floor(v.real() / eps)),
            static_cast<int64_t>(std::floor(v.imag() / eps))}]++;
    }
    int64_t candidates = 0;
    for (const auto& [cell, count] : bins)
      if (count >= 16) ++candidates;
    if (candidates >= 2) {
      notes << candidates
            << " accumulation-point candidates (finite probe, reported "
               "only); ";
    } else {
      out.failed_conditions.insert(ROCondition::derived_set);
      notes << "fewer than two accumulation-point candidates at this probe "
               "depth; ";
    }
  }

  out.in_class = out.failed_conditions.empty();
  out.notes = notes.str();
  return out;
}

DenseMatrix truncate(const OperatorSpec& spec, int64_t dim) {
  if (dim < 1) fail(ErrorKind::invalid_argument, "truncate: dim >= 1");
  if (dim > spec.series_length())
    fail(ErrorKind::contract,
         "truncate: dim exceeds the finite diagonal length");
  DenseMatrix m(dim);
  for (int64_t i = 0; i < dim; ++i) m.at(i, i) = spec.diag().value(i + 1);
  for (const auto& p : spec.pairs()) {
    std::vector<complex> us(static_cast<size_t>(dim)),
        vs(static_cast<size_t>(dim));
    for (int64_t i = 0; i < dim; ++i) {
      us[static_cast<size_t>(i)] = p.u.value(i + 1);
      vs[static_cast<size_t>(i)] = p.v.value(i + 1);
    }
    for (int64_t i = 0; i < dim; ++i)
      for (int64_t j = 0; j < dim; ++j)
        m.at(i, j) += us[static_cast<size_t>(i)] *
                      std::conj(vs[static_cast<size_t>(j)]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// JSON document format

namespace {

using nlohmann::json;

complex parse_scalar(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(ErrorKind::parse, where + ": scalar must be a number or [re, im]");
}

std::vector<complex> parse_values(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    fail(ErrorKind::parse, where + ": values must be a non-empty array");
  std::vector<complex> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(parse_scalar(e, where));
  return out;
}

RuleSpec parse_rule(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("name"))
    fail(ErrorKind::parse, where + ": rule needs a name");
  RuleSpec r;
  std::string name = j["name"].get<std::string>();
  if (name == "dyadic_section3") {
    r.name = RuleName::dyadic_section3;
  } else if (name == "geometric") {
    r.name = RuleName::geometric;
    if (!j.contains("ratio"))
      fail(ErrorKind::parse, where + ": geometric rule needs ratio");
    r.ratio = j["ratio"].get<double>();
  } else if (name == "power") {
    r.name = RuleName::power;
    if (!j.contains("exponent"))
      fail(ErrorKind::parse, where + ": power rule needs exponent");
    r.exponent = j["exponent"].get<double>();
  } else {
    fail(ErrorKind::parse, where + ": unknown rule name '" + name + "'");
  }
  if (j.contains("scale")) r.scale = j["scale"].get<double>();
  return r;
}

SeqKind parse_kind(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    fail(ErrorKind::parse, where + ": sequence needs a kind");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "finite-list") return SeqKind::finite_list;
  if (kind == "rule-generated") return SeqKind::rule_generated;
  fail(ErrorKind::parse, where + ": kind must be finite-list or "
                                 "rule-generated");
}

CoefficientSequence parse_coeff(const json& j, const std::string& where) {
  CoefficientSequence seq =
      parse_kind(j, where) == SeqKind::finite_list
          ? CoefficientSequence::finite(parse_values(j.at("values"), where))
          : CoefficientSequence::rule(parse_rule(j.at("rule"), where));
  if (j.contains("decay_class")) {
    const json& d = j["decay_class"];
    DecayClass dc;
    dc.exponent = d.at("exponent").get<double>();
    dc.scale = d.value("scale", 1.0);
    seq.set_decay_class(dc);
  }
  return seq;
}

json scalar_to_json(complex z) { return json::array({z.real(), z.imag()}); }

json rule_to_json(const RuleSpec& r) {
  json j;
  j["name"] = rule_name_str(r.name);
  if (r.name == RuleName::geometric) j["ratio"] = r.ratio;
  if (r.name == RuleName::power) j["exponent"] = r.exponent;
  j["scale"] = r.scale;
  return j;
}

json coeff_to_json(const CoefficientSequence& s) {
  json j;
  if (s.kind() == SeqKind::finite_list) {
    j["kind"] = "finite-list";
    json vals = json::array();
    for (complex v : s.finite_values()) vals.push_back(scalar_to_json(v));
    j["values"] = vals;
  } else {
    j["kind"] = "rule-generated";
    j["rule"] = rule_to_json(*s.rule_spec());
  }
  if (s.decay_class()) {
    j["decay_class"] = {{"exponent", s.decay_class()->exponent},
                        {"scale", s.decay_class()->scale}};
  }
  return j;
}

}  // namespace

OperatorSpec spec_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Recover line/column from the byte offset for the CLI diagnostics.
    size_t line = 1, col = 1;
    for (size_t i = 0; i < std::min(text.size(), e.byte); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorKind::parse, "JSON parse error at line " + std::to_string(line) +
                               ", column " + std::to_string(col) + ": " +
                               e.what());
  }
  if (!doc.is_object() || !doc.contains("diag") ||
      !doc.contains("perturbations"))
    fail(ErrorKind::parse,
         "operator spec needs 'diag' and 'perturbations' members");

  const json& dj = doc["diag"];
  DiagonalSequence diag =
      parse_kind(dj, "diag") == SeqKind::finite_list
          ? DiagonalSequence::finite(parse_values(dj.at("values"), "diag"))
          : DiagonalSequence::rule(parse_rule(dj.at("rule"), "diag"));
  diag.mark_parsed();

  const json& pj = doc["perturbations"];
  if (!pj.is_array() || pj.empty())
    fail(ErrorKind::parse, "perturbations must be a non-empty array");
  std::vector<PerturbationPair> pairs;
  for (size_t k = 0; k < pj.size(); ++k) {
    const json& e = pj[k];
    if (!e.is_object() || !e.contains("u") || !e.contains("v"))
      fail(ErrorKind::parse,
           "perturbation " + std::to_string(k + 1) + " needs 'u' and 'v'");
    pairs.push_back(
        {parse_coeff(e["u"], "u_" + std::to_string(k + 1)),
         parse_coeff(e["v"], "v_" + std::to_string(k + 1))});
  }
  return build_operator_spec(std::move(diag), std::move(pairs));
}

std::string spec_to_json(const OperatorSpec& spec) {
  json j;
  json dj;
  const DiagonalSequence& d = spec.diag();
  if (d.kind() == SeqKind::finite_list) {
    dj["kind"] = "finite-list";
    json vals = json::array();
    for (complex v : d.finite_values()) vals.push_back(scalar_to_json(v));
    dj["values"] = vals;
  } else {
    dj["kind"] = "rule-generated";
    dj["rule"] = rule_to_json(*d.rule_spec());
  }
  j["diag"] = dj;
  json pj = json::array();
  for (const auto& p : spec.pairs())
    pj.push_back({{"u", coeff_to_json(p.u)}, {"v", coeff_to_json(p.v)}});
  j["perturbations"] = pj;
  return j.dump(2);
}

}  // namespace diagrank
