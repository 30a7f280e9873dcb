#pragma once

// JSON wire formats.
//
//   ComplexMatrix   {"rows": r, "cols": c, "re": [...], "im": [...]}  (row-major)
//   PureState       {"dim": d, "re": [...], "im": [...]}
//   BlochVector     [x, y, z]
//   unitary family  {"d": d, "n": n, "unitaries": [ComplexMatrix...],
//                    "probabilities": null | [p_1, ..., p_n]}

#include "rsplab/bloch.hpp"
#include "rsplab/protocol.hpp"
#include "rsplab/qmath.hpp"
#include "rsplab/rsp_eq.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsplab {

using json = nlohmann::json;

/// Malformed input; `field()` names the offending JSON path.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

json to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const json& j, const std::string& field = "matrix");

json to_json(const PureState& phi);
PureState pure_state_from_json(const json& j, const std::string& field = "state");

json to_json(const BlochVector& b);
BlochVector bloch_from_json(const json& j, const std::string& field = "chi");

struct UnitaryFamily {
  int d = 0;
  std::vector<UnitaryOperator> unitaries;
  std::optional<RealVector> probabilities;

  /// FixedRule when probabilities are given, otherwise a solver-backed
  /// StateDependentRule.
  RspProtocol to_protocol(double tol = kDefaultFeasibilityTolerance) const;
};

json to_json(const UnitaryFamily& family);
UnitaryFamily family_from_json(const json& j);
UnitaryFamily load_family(const std::string& path);

json to_json(const RspTranscript& t);
json to_json(const ScanReport& r);

}  // namespace rsplab
