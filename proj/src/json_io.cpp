#include "rsplab/json_io.hpp"

#include <fstream>

namespace rsplab {

namespace {

std::vector<double> numbers_at(const json& j, const std::string& field, std::size_t expected) {
  if (!j.is_array()) throw FormatError(field, "expected an array of numbers");
  if (j.size() != expected) {
    throw FormatError(field, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : j) {
    if (!v.is_number()) throw FormatError(field, "entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

int positive_int_at(const json& j, const std::string& key, const std::string& field) {
  if (!j.contains(key)) throw FormatError(field + "." + key, "missing");
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) throw FormatError(field + "." + key, "expected a positive integer");
  return v.get<int>();
}

}  // namespace

json to_json(const ComplexMatrix& m) {
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

ComplexMatrix complex_matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) throw FormatError(field, "expected an object");
  const int rows = positive_int_at(j, "rows", field);
  const int cols = positive_int_at(j, "cols", field);
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (!j.contains("re")) throw FormatError(field + ".re", "missing");
  if (!j.contains("im")) throw FormatError(field + ".im", "missing");
  const auto re = numbers_at(j.at("re"), field + ".re", count);
  const auto im = numbers_at(j.at("im"), field + ".im", count);
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = Complex(re[r * cols + c], im[r * cols + c]);
  return m;
}

json to_json(const PureState& phi) {
  std::vector<double> re, im;
  for (int k = 0; k < phi.dim(); ++k) {
    re.push_back(phi[k].real());
    im.push_back(phi[k].imag());
  }
  return json{{"dim", phi.dim()}, {"re", re}, {"im", im}};
}

PureState pure_state_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) throw FormatError(field, "expected an object");
  const int d = positive_int_at(j, "dim", field);
  if (!j.contains("re")) throw FormatError(field + ".re", "missing");
  if (!j.contains("im")) throw FormatError(field + ".im", "missing");
  const auto re = numbers_at(j.at("re"), field + ".re", d);
  const auto im = numbers_at(j.at("im"), field + ".im", d);
  ComplexVector v(d);
  for (int k = 0; k < d; ++k) v(k) = Complex(re[k], im[k]);
  try {
    return PureState(std::move(v));
  } catch (const std::invalid_argument& e) {
    throw FormatError(field, e.what());
  }
}

json to_json(const BlochVector& b) { return json::array({b.chi.x(), b.chi.y(), b.chi.z()}); }

BlochVector bloch_from_json(const json& j, const std::string& field) {
  const auto v = numbers_at(j, field, 3);
  return BlochVector{Vector3(v[0], v[1], v[2])};
}

RspProtocol UnitaryFamily::to_protocol(double tol) const {
  if (probabilities) return RspProtocol(unitaries, FixedRule{*probabilities});
  StateDependentRule rule;
  rule.tol = tol;
  return RspProtocol(unitaries, std::move(rule));
}

json to_json(const UnitaryFamily& family) {
  json us = json::array();
  for (const auto& u : family.unitaries) us.push_back(to_json(u.matrix()));
  json probs = nullptr;
  if (family.probabilities) probs = std::vector<double>(family.probabilities->begin(), family.probabilities->end());
  return json{{"d", family.d}, {"n", family.unitaries.size()}, {"unitaries", us}, {"probabilities", probs}};
}

UnitaryFamily family_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("family", "expected an object");
  UnitaryFamily family;
  family.d = positive_int_at(j, "d", "family");
  const int n = positive_int_at(j, "n", "family");
  if (!j.contains("unitaries")) throw FormatError("family.unitaries", "missing");
  const json& us = j.at("unitaries");
  if (!us.is_array()) throw FormatError("family.unitaries", "expected an array");
  if (static_cast<int>(us.size()) != n) {
    throw FormatError("family.unitaries", "has " + std::to_string(us.size()) + " entries but n = " + std::to_string(n));
  }
  for (std::size_t m = 0; m < us.size(); ++m) {
    const std::string field = "family.unitaries[" + std::to_string(m) + "]";
    ComplexMatrix u = complex_matrix_from_json(us[m], field);
    if (u.rows() != family.d || u.cols() != family.d) {
      throw FormatError(field, "expected a " + std::to_string(family.d) + "x" + std::to_string(family.d) + " matrix");
    }
    try {
      family.unitaries.emplace_back(std::move(u));
    } catch (const std::invalid_argument& e) {
      throw FormatError(field, e.what());
    }
  }
  if (j.contains("probabilities") && !j.at("probabilities").is_null()) {
    const auto p = numbers_at(j.at("probabilities"), "family.probabilities", n);
    RealVector v = Eigen::Map<const RealVector>(p.data(), n);
    try {
      check_probability_vector(v, n);
    } catch (const std::invalid_argument& e) {
      throw FormatError("family.probabilities", e.what());
    }
    family.probabilities = std::move(v);
  }
  return family;
}

UnitaryFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("file", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("file", std::string("invalid JSON: ") + e.what());
  }
  return family_from_json(j);
}

json to_json(const RspTranscript& t) {
  return json{{"input_state", to_json(t.input)},
              {"outcome", t.outcome},
              {"outcome_probability", t.outcome_probability},
              {"bob_pre_correction", to_json(t.bob_before.matrix())},
              {"bob_post_correction", to_json(t.bob_after.matrix())},
              {"fidelity", t.fidelity},
              {"classical_cost_bits", t.classical_cost_bits}};
}

json to_json(const ScanReport& r) {
  return json{{"n", r.n},
              {"d", r.d},
              {"count", r.count},
              {"excluded", r.excluded},
              {"feasible_fraction", r.feasible_fraction},
              {"max_residual", r.max_residual},
              {"min_residual", r.min_residual},
              {"worst_state", r.worst_state ? to_json(*r.worst_state) : json(nullptr)},
              {"seed", r.seed}};
}

}  // namespace rsplab
