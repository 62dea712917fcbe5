#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "anonsense/analytic.hpp"
#include "anonsense/cli.hpp"
#include "anonsense/combinatorics.hpp"
#include "anonsense/estimation.hpp"
#include "anonsense/fisher.hpp"
#include "anonsense/io.hpp"

namespace py = pybind11;
using namespace anonsense;

namespace {

ProtocolConfig protocol_from(const std::string& text) {
  return parse_run_config(Json{{"protocol", parse_json_text(text, "protocol")}}).protocol;
}

Sign sign_from(const std::string& s) {
  if (s == "+") return Sign::plus;
  if (s == "-") return Sign::minus;
  throw py::value_error("sign must be '+' or '-'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of anonsense. JSON documents cross the boundary as strings.";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  m.def("binomial", [](std::int64_t n, std::int64_t k) { return binomial(n, k).str(); },
        "Exact C(n, k) as a decimal string.");

  m.def("gamma",
        [](int n, std::vector<double> omegas, double t, int k, const std::string& sign) {
          return gamma(n, FieldVector{std::move(omegas), t}, k, sign_from(sign));
        },
        py::arg("n"), py::arg("omegas"), py::arg("t"), py::arg("k"), py::arg("sign"));

  m.def("outcome_distribution",
        [](const std::string& protocol, std::vector<double> omegas) {
          const auto cfg = protocol_from(protocol);
          const auto d = outcome_distribution(cfg, FieldVector{std::move(omegas), cfg.t});
          std::vector<std::pair<std::string, double>> out;
          for (std::size_t i = 0; i < d.size(); ++i)
            out.emplace_back(d.labels[i].to_string(), d.probabilities[i]);
          return out;
        },
        py::arg("protocol"), py::arg("omegas"));

  m.def("fisher_matrix",
        [](const std::string& protocol, std::vector<double> theta, std::int64_t shots) {
          const auto cfg = protocol_from(protocol);
          const auto r = fisher_matrix(cfg, PhaseParameters{cfg.m_est, std::move(theta)},
                                       DerivativeMethod::analytic, shots);
          return py::make_tuple(r.J, r.J_inv, r.crb_diag);
        },
        py::arg("protocol"), py::arg("theta"), py::arg("shots") = 1);

  m.def("closed_form_j22", &closed_form_j22, py::arg("n"), py::arg("a"), py::arg("q0"),
        py::arg("theta1"), py::arg("theta2"));
  m.def("limit_j22", &limit_j22, py::arg("q0"), py::arg("theta1"), py::arg("theta2"));
  m.def("dilution", &dilution, py::arg("n"), py::arg("a"));
  m.def("optimal_a", &optimal_a, py::arg("n"));

  m.def("estimate",
        [](const std::string& counts, const std::string& protocol) {
          const auto report =
              mle_estimate(parse_counts(parse_json_text(counts, "counts")), protocol_from(protocol));
          return to_json(report).dump();
        },
        py::arg("counts"), py::arg("protocol"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
