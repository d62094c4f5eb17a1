// Python bindings for the kerrsim core: netlist handling, cell library,
// reduction, SDE integration, and trajectory analysis.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kerrsim/analysis.hpp"
#include "kerrsim/drives.hpp"
#include "kerrsim/flatten.hpp"
#include "kerrsim/netlist.hpp"
#include "kerrsim/reduction.hpp"
#include "kerrsim/sde.hpp"
#include "kerrsim/stdcells.hpp"

namespace py = pybind11;
using namespace kerrsim;

PYBIND11_MODULE(_pykerrsim, m) {
    m.doc() = "Semiclassical simulator for Kerr-nonlinear photonic logic circuits";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    // ---------------------------------------------------------------- netlist
    py::class_<Netlist>(m, "Netlist")
        .def_readonly("name", &Netlist::name)
        .def("__str__", [](const Netlist& nl) { return serialize_netlist(nl); });

    m.def("parse_netlist", [](const std::string& s) { return parse_netlist(s); },
          py::arg("text"), "Parse the line-oriented netlist format.");
    m.def("serialize_netlist", &serialize_netlist, py::arg("netlist"));
    m.def("validate_netlist", &validate_netlist, py::arg("netlist"),
          "Structural checks; raises ValidationError on problems.");

    py::class_<FlatCircuit>(m, "FlatCircuit")
        .def_readonly("name", &FlatCircuit::name)
        .def_property_readonly("n_resonators", &FlatCircuit::n_resonators)
        .def_property_readonly("n_components",
                               [](const FlatCircuit& fc) { return fc.components.size(); })
        .def_property_readonly("component_names",
                               [](const FlatCircuit& fc) {
                                   std::vector<std::string> out;
                                   for (const auto& c : fc.components) out.push_back(c.name);
                                   return out;
                               })
        .def_property_readonly("input_names",
                               [](const FlatCircuit& fc) {
                                   std::vector<std::string> out;
                                   for (const auto& i : fc.inputs) out.push_back(i.name);
                                   return out;
                               })
        .def_property_readonly("output_names", [](const FlatCircuit& fc) {
            std::vector<std::string> out;
            for (const auto& o : fc.outputs) out.push_back(o.name);
            return out;
        });

    m.def("flatten", &flatten, py::arg("netlist"),
          "Expand compound definitions into a flat component graph.");

    py::class_<CircuitReport>(m, "CircuitReport")
        .def_readonly("counts", &CircuitReport::counts)
        .def_readonly("violations", &CircuitReport::violations)
        .def_property_readonly("simulable", &CircuitReport::simulable)
        .def("__str__", &CircuitReport::to_text);

    m.def("check_circuit", &check_circuit, py::arg("flat"));

    // ------------------------------------------------------------------ cells
    py::enum_<CellKind>(m, "CellKind")
        .value("AmplifierStage", CellKind::AmplifierStage)
        .value("AndGate", CellKind::AndGate)
        .value("Fanout", CellKind::Fanout)
        .value("Latch", CellKind::Latch)
        .value("DFlipFlop", CellKind::DFlipFlop)
        .value("Counter4", CellKind::Counter4);

    m.def("parse_cell_kind", &parse_cell_kind, py::arg("name"));

    py::class_<CellSpec>(m, "CellSpec")
        .def(py::init([](const std::string& kind, double e_high, int stage, bool inverting) {
                 CellSpec s;
                 s.kind = parse_cell_kind(kind);
                 s.e_high = e_high;
                 s.stage = stage;
                 s.inverting = inverting;
                 return s;
             }),
             py::arg("kind"), py::arg("e_high") = 50.0, py::arg("stage") = 0,
             py::arg("inverting") = false)
        .def_readwrite("e_high", &CellSpec::e_high)
        .def_readwrite("stage", &CellSpec::stage)
        .def_readwrite("inverting", &CellSpec::inverting);

    m.def("build_cell", &build_cell, py::arg("spec"),
          "Netlist for a standard cell with named external ports.");
    m.def("cell_drives", &cell_drives, py::arg("spec"),
          "Auxiliary coherent drives (bias levels) the cell needs.");
    m.def("cell_params_json", []() { return cell_params_json(); },
          "Embedded cell parameter table as a JSON string.");
    m.def("switching_energy", &switching_energy, py::arg("kappa"), py::arg("kappa1"),
          py::arg("chi"));

    py::class_<ClassicalResponse>(m, "ClassicalResponse")
        .def_readonly("photon_numbers", &ClassicalResponse::photon_numbers)
        .def_readonly("bistable", &ClassicalResponse::bistable);

    m.def(
        "classical_response",
        [](double delta, double chi, std::vector<double> kappas, double kappa1, double beta_in) {
            ResonatorParams p;
            p.delta = delta;
            p.chi = chi;
            for (double k : kappas) p.couplings.push_back({k, -kPi / 2});
            return classical_response(p, kappa1, beta_in);
        },
        py::arg("delta"), py::arg("chi"), py::arg("kappas"), py::arg("kappa1"),
        py::arg("beta_in"), "Steady-state photon-number roots of the driven resonator.");

    // ----------------------------------------------------------------- drives
    py::class_<Waveform>(m, "Waveform")
        .def_static("constant", &Waveform::constant, py::arg("level"))
        .def_static("square", &Waveform::square, py::arg("low"), py::arg("high"),
                    py::arg("period"), py::arg("duty") = 0.5, py::arg("phase") = 0.0)
        .def_static("triangle", &Waveform::triangle, py::arg("low"), py::arg("high"),
                    py::arg("period"), py::arg("phase") = 0.0)
        .def_static("piecewise", &Waveform::piecewise, py::arg("breakpoints"))
        .def("eval", &Waveform::eval, py::arg("t"));

    py::class_<DriveProgram>(m, "DriveProgram")
        .def(py::init<>())
        .def("set",
             [](DriveProgram& dp, const std::string& name, const Waveform& w) {
                 dp.waveforms[name] = w;
             })
        .def("names",
             [](const DriveProgram& dp) {
                 std::vector<std::string> out;
                 for (const auto& [k, v] : dp.waveforms) out.push_back(k);
                 return out;
             })
        .def("__str__", [](const DriveProgram& dp) { return serialize_drive_program(dp); });

    m.def("parse_drive_program", [](const std::string& s) { return parse_drive_program(s); },
          py::arg("text"));

    // -------------------------------------------------------------- reduction
    py::class_<ReducedSystem>(m, "ReducedSystem")
        .def_readonly("A", &ReducedSystem::A)
        .def_readonly("B", &ReducedSystem::B)
        .def_readonly("C", &ReducedSystem::C)
        .def_readonly("D", &ReducedSystem::D)
        .def_readonly("a", &ReducedSystem::a)
        .def_readonly("c", &ReducedSystem::c)
        .def_readonly("bare", &ReducedSystem::bare)
        .def_readonly("input_names", &ReducedSystem::input_names)
        .def_readonly("input_drives", &ReducedSystem::input_drives)
        .def_readonly("output_names", &ReducedSystem::output_names)
        .def_property_readonly("n_states", &ReducedSystem::n_states)
        .def_property_readonly("resonator_names",
                               [](const ReducedSystem& rs) {
                                   std::vector<std::string> out;
                                   for (const auto& r : rs.resonators) out.push_back(r.name);
                                   return out;
                               })
        .def("state_index",
             [](const ReducedSystem& rs, const std::string& n) { return rs.state_index(n); })
        .def("output_index",
             [](const ReducedSystem& rs, const std::string& n) { return rs.output_index(n); })
        .def("__str__", &serialize_reduced);

    m.def("reduce", &reduce, py::arg("flat"),
          "Algebraic internal-field elimination to external ports.");
    m.def("backprop_reduce", &backprop_reduce, py::arg("flat"),
          "Independent reduction by backward propagation (loop-free circuits).");

    // ------------------------------------------------------------------- SDE
    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_max", &SimConfig::t_max)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("avg_window", &SimConfig::avg_window)
        .def_readwrite("noise", &SimConfig::noise)
        .def_readwrite("kerr_minus_one", &SimConfig::kerr_minus_one)
        .def_readwrite("trajectory_index", &SimConfig::trajectory_index);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("time", &Trajectory::time)
        .def_readonly("alpha", &Trajectory::alpha)
        .def_readonly("outputs", &Trajectory::outputs)
        .def_readonly("seed", &Trajectory::seed)
        .def_readonly("dt", &Trajectory::dt)
        .def_property_readonly("n_samples", &Trajectory::n_samples);

    m.def("default_dt", &default_dt, py::arg("system"));
    m.def("run_trajectory", &run_trajectory, py::arg("system"), py::arg("drives"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("run_ensemble", &run_ensemble, py::arg("system"), py::arg("drives"), py::arg("config"),
          py::arg("n_traj"), py::arg("n_workers") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("trajectory_csv", &trajectory_csv, py::arg("trajectory"), py::arg("system"),
          py::arg("resonator_names") = std::vector<std::string>{},
          py::arg("output_names") = std::vector<std::string>{});

    // --------------------------------------------------------------- analysis
    py::class_<JumpConfig>(m, "JumpConfig")
        .def(py::init<>())
        .def_readwrite("low", &JumpConfig::low)
        .def_readwrite("high", &JumpConfig::high)
        .def_readwrite("hysteresis_low", &JumpConfig::hysteresis_low)
        .def_readwrite("hysteresis_high", &JumpConfig::hysteresis_high)
        .def_readwrite("min_dwell", &JumpConfig::min_dwell);

    py::class_<JumpStatistics>(m, "JumpStatistics")
        .def_readonly("n_up", &JumpStatistics::n_up)
        .def_readonly("n_down", &JumpStatistics::n_down)
        .def_readonly("time_low", &JumpStatistics::time_low)
        .def_readonly("time_high", &JumpStatistics::time_high)
        .def_readonly("r_up", &JumpStatistics::r_up)
        .def_readonly("r_down", &JumpStatistics::r_down)
        .def_readonly("err_up", &JumpStatistics::err_up)
        .def_readonly("err_down", &JumpStatistics::err_down)
        .def("__str__", &JumpStatistics::to_text);

    m.def("detect_jumps", &detect_jumps, py::arg("time"), py::arg("series"), py::arg("config"));

    py::class_<AutocorrFit>(m, "AutocorrFit")
        .def_readonly("rate", &AutocorrFit::rate)
        .def_readonly("residual", &AutocorrFit::residual)
        .def_readonly("accepted", &AutocorrFit::accepted);

    m.def("autocorr_rate", &autocorr_rate, py::arg("series"), py::arg("dt"));

    py::class_<DelayMeasurement>(m, "DelayMeasurement")
        .def_readonly("edge_time", &DelayMeasurement::edge_time)
        .def_readonly("crossing_time", &DelayMeasurement::crossing_time)
        .def_readonly("tau", &DelayMeasurement::tau)
        .def_readonly("rising", &DelayMeasurement::rising)
        .def_readonly("measurable", &DelayMeasurement::measurable);

    m.def("measure_delay", &measure_delay, py::arg("time"), py::arg("stimulus"),
          py::arg("response"), py::arg("stim_low"), py::arg("stim_high"), py::arg("resp_low"),
          py::arg("resp_high"));

    m.def("smoothed_magnitude", &smoothed_magnitude, py::arg("series"), py::arg("window"),
          "Magnitude of a centered boxcar average of a complex series.");

    py::class_<CounterErrors>(m, "CounterErrors")
        .def_readonly("n_checks", &CounterErrors::n_checks)
        .def_readonly("n_errors", &CounterErrors::n_errors)
        .def_readonly("n_undecodable", &CounterErrors::n_undecodable)
        .def_readonly("t_observed", &CounterErrors::t_observed)
        .def_readonly("rate", &CounterErrors::rate)
        .def_readonly("error_times", &CounterErrors::error_times);

    m.def("counter_error_rate", &counter_error_rate, py::arg("time"), py::arg("bits"),
          py::arg("clock"), py::arg("e_high"), py::arg("t_start"));

    m.def(
        "polyfit",
        [](const std::vector<double>& x, const std::vector<double>& y, int degree) {
            double rms = 0.0;
            auto c = polyfit(x, y, degree, &rms);
            return py::make_tuple(c, rms);
        },
        py::arg("x"), py::arg("y"), py::arg("degree"),
        "Least-squares polynomial fit; returns (coefficients, rms_residual).");
}
