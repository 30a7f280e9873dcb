#include "rsplab/bloch.hpp"
#include "rsplab/cli.hpp"
#include "rsplab/json_io.hpp"
#include "rsplab/protocol.hpp"
#include "rsplab/qmath.hpp"
#include "rsplab/rsp_eq.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rsplab;

namespace {

std::vector<UnitaryOperator> as_unitaries(const std::vector<ComplexMatrix>& ms) {
  std::vector<UnitaryOperator> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.emplace_back(m);
  return out;
}

Subsystem as_subsystem(const std::string& s) {
  if (s == "A" || s == "a") return Subsystem::A;
  if (s == "B" || s == "b") return Subsystem::B;
  throw std::invalid_argument("keep must be 'A' or 'B'");
}

Sampler as_sampler(const std::string& s) {
  if (s == "haar") return Sampler::Haar;
  if (s == "equatorial") return Sampler::Equatorial;
  throw std::invalid_argument("sampler must be 'haar' or 'equatorial'");
}

}  // namespace

PYBIND11_MODULE(_rsplab, m) {
  m.doc() = "Remote state preparation toolkit (C++ core)";

  py::register_exception<RspError>(m, "RspError");
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<PureState>(m, "PureState")
      .def(py::init<ComplexVector>(), py::arg("amplitudes"))
      .def_static("normalized", &PureState::normalized)
      .def_property_readonly("dim", &PureState::dim)
      .def_property_readonly("amplitudes", &PureState::amplitudes)
      .def("projector", &PureState::projector)
      .def("__repr__", [](const PureState& s) { return "PureState(" + to_json(s).dump() + ")"; });

  py::class_<DensityOperator>(m, "DensityOperator")
      .def(py::init<const ComplexMatrix&>(), py::arg("matrix"))
      .def_static("from_pure", &DensityOperator::from_pure)
      .def_property_readonly("dim", &DensityOperator::dim)
      .def_property_readonly("matrix", &DensityOperator::matrix);

  py::class_<UnitaryOperator>(m, "UnitaryOperator")
      .def(py::init<ComplexMatrix>(), py::arg("matrix"))
      .def_property_readonly("dim", &UnitaryOperator::dim)
      .def_property_readonly("matrix", &UnitaryOperator::matrix);

  // qmath
  m.def("tensor", &tensor);
  m.def(
      "partial_trace",
      [](const ComplexMatrix& op, const std::string& keep, int d_a, int d_b) {
        return partial_trace(op, as_subsystem(keep), d_a, d_b);
      },
      py::arg("op"), py::arg("keep"), py::arg("d_a"), py::arg("d_b"));
  m.def("max_entangled", &max_entangled, py::arg("d"));
  m.def("haar_random_state", py::overload_cast<int, std::uint64_t>(&haar_random_state), py::arg("d"),
        py::arg("seed"));
  m.def("hs_inner", &hs_inner);
  m.def("overlap_trace", &overlap_trace);
  m.def("von_neumann_entropy", &von_neumann_entropy);
  m.def("purity", &purity);
  m.def("fidelity", &fidelity);

  // protocol
  py::class_<RspProtocol>(m, "RspProtocol")
      .def_property_readonly("d", &RspProtocol::d)
      .def_property_readonly("n", &RspProtocol::n)
      .def_property_readonly("unitaries",
                             [](const RspProtocol& p) {
                               std::vector<ComplexMatrix> out;
                               for (const auto& u : p.unitaries()) out.push_back(u.matrix());
                               return out;
                             })
      .def("probabilities", &RspProtocol::probabilities)
      .def_property_readonly("classical_cost_bits", &RspProtocol::classical_cost_bits);

  m.def(
      "make_protocol",
      [](const std::vector<ComplexMatrix>& unitaries, std::optional<RealVector> p, double tol) {
        if (p) return RspProtocol(as_unitaries(unitaries), FixedRule{*p});
        StateDependentRule rule;
        rule.tol = tol;
        return RspProtocol(as_unitaries(unitaries), std::move(rule));
      },
      py::arg("unitaries"), py::arg("probabilities") = py::none(), py::arg("tol") = kDefaultFeasibilityTolerance,
      "Fixed probabilities when given, otherwise solved per state.");
  m.def("shift_family", &shift_family, py::arg("d"));
  m.def("shift_operator", [](int p, int x, int d) { return shift_operator(p, x, d).matrix(); }, py::arg("p"),
        py::arg("x"), py::arg("d"));
  m.def("equatorial_protocol", &equatorial_protocol);
  m.def("conjugate_state", &conjugate_state);

  py::class_<Povm>(m, "Povm")
      .def_readonly("d", &Povm::d)
      .def_readonly("elements", &Povm::elements)
      .def("completeness_deviation", &Povm::completeness_deviation);
  m.def("build_povm", &build_povm, py::arg("phi"), py::arg("proto"), py::arg("p"),
        py::arg("tol") = kDefaultFeasibilityTolerance);
  m.def("alice_outcome_distribution", &alice_outcome_distribution);
  m.def("post_measurement_state", &post_measurement_state, py::arg("phi"), py::arg("proto"), py::arg("povm"),
        py::arg("m"));
  m.def("bob_correct", [](const DensityOperator& rho, const ComplexMatrix& u) {
    return bob_correct(rho, UnitaryOperator(u));
  });

  py::class_<RspTranscript>(m, "RspTranscript")
      .def_readonly("input", &RspTranscript::input)
      .def_readonly("outcome", &RspTranscript::outcome)
      .def_readonly("outcome_probability", &RspTranscript::outcome_probability)
      .def_readonly("bob_before", &RspTranscript::bob_before)
      .def_readonly("bob_after", &RspTranscript::bob_after)
      .def_readonly("fidelity", &RspTranscript::fidelity)
      .def_readonly("classical_cost_bits", &RspTranscript::classical_cost_bits)
      .def("to_json", [](const RspTranscript& t) { return to_json(t).dump(); });
  m.def("run_rsp", py::overload_cast<const PureState&, const RspProtocol&, std::uint64_t>(&run_rsp),
        py::arg("phi"), py::arg("proto"), py::arg("seed"));

  // rsp_eq
  py::enum_<FeasibilityStatus>(m, "FeasibilityStatus")
      .value("Feasible", FeasibilityStatus::Feasible)
      .value("Infeasible", FeasibilityStatus::Infeasible);
  py::class_<FeasibilityResult>(m, "FeasibilityResult")
      .def_readonly("status", &FeasibilityResult::status)
      .def_readonly("probabilities", &FeasibilityResult::probabilities)
      .def_readonly("min_residual", &FeasibilityResult::min_residual)
      .def_readonly("tolerance", &FeasibilityResult::tolerance)
      .def_property_readonly("feasible", &FeasibilityResult::feasible);

  m.def("rsp_residual", [](const std::vector<ComplexMatrix>& us, const RealVector& p, const PureState& phi) {
    return rsp_residual(as_unitaries(us), p, phi);
  });
  m.def(
      "solve_probabilities",
      [](const std::vector<ComplexMatrix>& us, const PureState& phi, double tol) {
        return solve_probabilities(as_unitaries(us), phi, tol);
      },
      py::arg("unitaries"), py::arg("phi"), py::arg("tol") = kDefaultFeasibilityTolerance);
  m.def(
      "feasibility_scan",
      [](const std::vector<ComplexMatrix>& us, int count, double tol, std::uint64_t seed, const std::string& sampler,
         double generic_margin) {
        ScanOptions opt;
        opt.count = count;
        opt.tol = tol;
        opt.seed = seed;
        opt.sampler = as_sampler(sampler);
        opt.generic_margin = generic_margin;
        return to_json(feasibility_scan(as_unitaries(us), opt)).dump();
      },
      py::arg("unitaries"), py::arg("count"), py::arg("tol") = kDefaultFeasibilityTolerance, py::arg("seed") = 0,
      py::arg("sampler") = "haar", py::arg("generic_margin") = 0.0, "Returns the scan report as a JSON string.");
  m.def("build_x_matrix", [](const std::vector<ComplexMatrix>& us, const RealVector& p) {
    return build_x_matrix(as_unitaries(us), p).entries;
  });
  m.def("oblivious_bound_report", [](const std::vector<ComplexMatrix>& us, const RealVector& p) {
    const ObliviousBoundReport r = oblivious_bound_report(as_unitaries(us), p);
    py::dict out;
    out["n"] = r.n;
    out["d"] = r.d;
    out["gram"] = r.gram;
    out["gram_deviation"] = r.gram_deviation;
    out["is_identity"] = r.is_identity;
    out["bound_satisfied"] = r.bound_satisfied;
    out["xx_dagger_deviation"] = r.xx_dagger_deviation;
    out["uniform_deviation"] = r.uniform_deviation;
    out["trace_condition_deviation"] = r.trace_condition_deviation;
    return out;
  });
  m.def("completeness_rank", [](const std::vector<ComplexMatrix>& us, const PureState& phi) {
    return completeness_rank(as_unitaries(us), phi);
  });

  // bloch
  m.def("bloch_from_state", [](const PureState& phi) { return Eigen::Vector3d(bloch_from_state(phi).chi); });
  m.def("state_from_bloch", [](const Eigen::Vector3d& chi) { return state_from_bloch(BlochVector{chi}); });
  m.def("rotation_from_unitary",
        [](const ComplexMatrix& u) { return Eigen::Matrix3d(rotation_from_unitary(UnitaryOperator(u)).matrix()); });
  m.def("reduced_residual",
        [](const std::vector<Eigen::Matrix3d>& rs, const RealVector& p, const Eigen::Vector3d& chi) {
          std::vector<RotationMatrix> rots(rs.begin(), rs.end());
          return reduced_residual(rots, p, BlochVector{chi});
        });
  m.def("n3_matrix", [](const Eigen::Vector3d& chi) {
    const N3Matrix r = n3_matrix(BlochVector{chi});
    return py::make_tuple(Eigen::Matrix3d(r.m), r.determinant);
  });
  m.def("canonicalize", [](const std::vector<Eigen::Matrix3d>& rs) {
    std::vector<RotationMatrix> rots(rs.begin(), rs.end());
    const CanonicalForm c = canonicalize(rots);
    std::vector<Eigen::Matrix3d> out;
    for (const auto& r : c.rotations) out.push_back(r.matrix());
    return py::make_tuple(Eigen::Matrix3d(c.s.matrix()), Eigen::Matrix3d(c.t.matrix()), out);
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI subcommand; returns (exit_code, stdout, stderr).");
}
