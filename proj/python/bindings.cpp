#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sadiv/analytic.hpp"
#include "sadiv/errors.hpp"
#include "sadiv/galois.hpp"
#include "sadiv/rlnc.hpp"
#include "sadiv/uplink.hpp"

namespace py = pybind11;
using namespace sadiv;

namespace {

const GaloisField& field_for(unsigned bits) {
  if (bits == 8) return GaloisField::gf256();
  if (bits == 16) return GaloisField::gf65536();
  throw std::invalid_argument("field_bits must be 8 or 16");
}

py::dict uplink_summary(double rho, double eps, unsigned k, std::uint64_t n_slots,
                        std::uint64_t seed) {
  const UplinkRun run = run_uplink({rho, eps, k}, n_slots, seed);
  py::dict d;
  d["union_count"] = run.ledger.union_count();
  std::vector<std::size_t> per_relay;
  for (unsigned r = 0; r < k; ++r) per_relay.push_back(run.ledger.relay_set(r).size());
  d["relay_counts"] = per_relay;
  d["union_rate"] = run.stats.union_rate.mean;
  d["union_rate_stderr"] = run.stats.union_rate.std_err;
  d["partition_counts"] = run.ledger.partition_counts();
  std::vector<std::size_t> exclusive;
  for (RelaySet s = 1; s <= full_relay_set(k); ++s) exclusive.push_back(run.ledger.exclusive_count(s));
  d["exclusive_counts"] = exclusive;
  return d;
}

py::dict downlink_trial(double rho, double eps, unsigned k, std::uint64_t n_slots,
                        std::uint64_t seed, unsigned field_bits, double slack,
                        std::size_t payload_symbols, bool genie) {
  const GaloisField& f = field_for(field_bits);
  const DownlinkTrial t =
      run_downlink_trial({{rho, eps, k}, n_slots, seed, slack, payload_symbols, genie}, f);
  py::dict d;
  d["union_count"] = t.union_count;
  d["budgets"] = t.budgets;
  d["n_variables"] = t.report.n_variables;
  d["rank"] = t.report.rank;
  d["recovered"] = t.report.recovered.size();
  d["success"] = t.report.success;
  d["necessary_ok"] = t.conditions.ok;
  d["violations"] = t.conditions.violations;
  d["bit_exact"] = t.bit_exact;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Slotted Aloha with receiver diversity: closed forms, simulation, RLNC downlink";

  py::register_exception<DegenerateChannelError>(m, "DegenerateChannelError", PyExc_ValueError);
  py::register_exception<UnreachableTargetError>(m, "UnreachableTargetError", PyExc_ValueError);
  py::register_exception<DivisionByZeroError>(m, "DivisionByZeroError", PyExc_ZeroDivisionError);
  py::register_exception<EnumerationTooLargeError>(m, "EnumerationTooLargeError",
                                                   PyExc_ValueError);
  py::register_exception<UnsupportedConfigurationError>(m, "UnsupportedConfigurationError",
                                                        PyExc_ValueError);

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init([](double rho, double eps, unsigned k) {
             ChannelParams p{rho, eps, k};
             p.validate();
             return p;
           }),
           py::arg("rho"), py::arg("eps"), py::arg("k_relays") = 1)
      .def_readwrite("rho", &ChannelParams::rho)
      .def_readwrite("eps", &ChannelParams::eps)
      .def_readwrite("k_relays", &ChannelParams::k_relays)
      .def("__repr__", [](const ChannelParams& p) {
        return "ChannelParams(rho=" + std::to_string(p.rho) + ", eps=" + std::to_string(p.eps) +
               ", k_relays=" + std::to_string(p.k_relays) + ")";
      });

  py::class_<PeakPoint>(m, "PeakPoint")
      .def_readonly("rho_star", &PeakPoint::rho_star)
      .def_readonly("t_star", &PeakPoint::t_star);

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("mean", &Estimate::mean)
      .def_readonly("std_err", &Estimate::std_err)
      .def_readonly("n_samples", &Estimate::n_samples);

  m.def("throughput_sa", &throughput_sa, py::arg("params"));
  m.def("throughput_uplink_two", &throughput_uplink_two, py::arg("params"));
  m.def("throughput_uplink", &throughput_uplink, py::arg("params"));
  m.def("incremental_gain", &incremental_gain, py::arg("params"));
  m.def("packet_loss", &packet_loss, py::arg("params"));
  m.def("peak_throughput", &peak_throughput, py::arg("eps"), py::arg("k_relays"));
  m.def("peak_approx_two", &peak_approx_two, py::arg("eps"));
  m.def("load_for_target_plr", &load_for_target_plr, py::arg("eps"), py::arg("k_relays"),
        py::arg("zeta_target"));
  m.def("sic_gain_two", &sic_gain_two, py::arg("params"));
  m.def("throughput_af_two", &throughput_af_two, py::arg("params"));
  m.def("peak_throughput_af_two", &peak_throughput_af_two, py::arg("eps"));
  m.def(
      "rate_bound",
      [](const ChannelParams& p, unsigned s) { return rate_bound(p, s).bound; },
      py::arg("params"), py::arg("subset_size"));
  m.def(
      "allocate_rates",
      [](const ChannelParams& p, double slack) { return allocate_rates(p, slack).per_relay; },
      py::arg("params"), py::arg("slack") = 0.05);

  m.def("run_uplink", &uplink_summary, py::arg("rho"), py::arg("eps"), py::arg("k_relays"),
        py::arg("n_slots"), py::arg("seed"),
        "Simulate the uplink; returns counts from the collection ledger.");
  m.def("estimate_plr", &estimate_plr, py::arg("params"), py::arg("n_trials"), py::arg("seed"));
  m.def("brute_force_collection_pmf", &brute_force_collection_pmf, py::arg("u"),
        py::arg("k_relays"), py::arg("eps"));
  m.def("enumerated_throughput", &enumerated_throughput, py::arg("params"));

  m.def(
      "gf_mul",
      [](unsigned bits, Element a, Element b) {
        return field_for(bits).mul(a, b);
      },
      py::arg("bits"), py::arg("a"), py::arg("b"));
  m.def(
      "gf_inv",
      [](unsigned bits, Element a) {
        return field_for(bits).inv(a);
      },
      py::arg("bits"), py::arg("a"));

  m.def("run_downlink_trial", &downlink_trial, py::arg("rho"), py::arg("eps"),
        py::arg("k_relays"), py::arg("n_slots"), py::arg("seed"), py::arg("field_bits") = 8,
        py::arg("slack") = 0.05, py::arg("payload_symbols") = 16, py::arg("genie") = false);
}
