#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "impulseq/core_model.hpp"
#include "impulseq/erlang_fluid.hpp"
#include "impulseq/impulse_design.hpp"
#include "impulseq/linear_fluid.hpp"
#include "impulseq/numeric_oracle.hpp"

namespace py = pybind11;
using namespace impulseq;

namespace {

ImpulseSpec make_spec(double m, std::optional<double> delta, std::optional<double> tau, ImpulseMode mode) {
    if (delta && tau) throw ParameterError("give either delta or tau, not both");
    ImpulseSpec spec;
    spec.m = m;
    spec.mode = mode;
    if (delta) {
        spec.schedule = Periodic{*delta};
    } else {
        spec.schedule = Single{tau.value_or(0.0)};
    }
    return spec;
}

}  // namespace

PYBIND11_MODULE(_impulseq, m) {
    m.doc() = "Fluid queues under multiplicative impulses";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<InstabilityError>(m, "InstabilityError", PyExc_ArithmeticError);
    py::register_exception<UndefinedFixedPointError>(m, "UndefinedFixedPointError", PyExc_ArithmeticError);
    py::register_exception<BoundaryError>(m, "BoundaryError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::enum_<ImpulseMode>(m, "ImpulseMode")
        .value("FullState", ImpulseMode::FullState)
        .value("AbandonmentOnly", ImpulseMode::AbandonmentOnly);
    py::enum_<Dynamics>(m, "Dynamics").value("Linear", Dynamics::Linear).value("ErlangA", Dynamics::ErlangA);
    py::enum_<RegimeCase>(m, "RegimeCase")
        .value("OverStartOverLoad", RegimeCase::OverStartOverLoad)
        .value("UnderStartOverLoad", RegimeCase::UnderStartOverLoad)
        .value("OverStartUnderLoad", RegimeCase::OverStartUnderLoad)
        .value("UnderStartUnderLoad", RegimeCase::UnderStartUnderLoad);

    py::class_<QueueParams>(m, "QueueParams")
        .def(py::init([](double lambda, double mu, double theta, double c) {
                 QueueParams p{lambda, mu, theta, c};
                 validate(p);
                 return p;
             }),
             py::arg("lambda_"), py::arg("mu"), py::arg("theta") = 0.0, py::arg("c") = 1.0)
        .def_readwrite("lambda_", &QueueParams::lambda)
        .def_readwrite("mu", &QueueParams::mu)
        .def_readwrite("theta", &QueueParams::theta)
        .def_readwrite("c", &QueueParams::c)
        .def("__repr__", [](const QueueParams& p) {
            return "QueueParams(lambda_=" + py::repr(py::float_(p.lambda)).cast<std::string>() +
                   ", mu=" + py::repr(py::float_(p.mu)).cast<std::string>() +
                   ", theta=" + py::repr(py::float_(p.theta)).cast<std::string>() +
                   ", c=" + py::repr(py::float_(p.c)).cast<std::string>() + ")";
        });

    py::class_<SteadyBounds>(m, "SteadyBounds")
        .def_readonly("lower", &SteadyBounds::lower)
        .def_readonly("upper", &SteadyBounds::upper)
        .def_readonly("amplitude", &SteadyBounds::amplitude);

    py::class_<ErlangSteadyBounds>(m, "ErlangSteadyBounds")
        .def_readonly("bounds", &ErlangSteadyBounds::bounds)
        .def_readonly("regime_valid", &ErlangSteadyBounds::regime_valid)
        .def_readonly("rate", &ErlangSteadyBounds::rate)
        .def_readonly("target", &ErlangSteadyBounds::target);

    py::class_<Candidate>(m, "Candidate")
        .def_readonly("label", &Candidate::label)
        .def_readonly("tau", &Candidate::tau)
        .def_readonly("J", &Candidate::J)
        .def_property_readonly("provenance", [](const Candidate& c) { return to_string(c.provenance); });

    py::class_<OptimalTimes>(m, "OptimalTimes")
        .def_readonly("tau_min", &OptimalTimes::tau_min)
        .def_readonly("tau_max", &OptimalTimes::tau_max)
        .def_readonly("J_min", &OptimalTimes::J_min)
        .def_readonly("J_max", &OptimalTimes::J_max)
        .def_readonly("candidates", &OptimalTimes::candidates);

    py::class_<SubInterval>(m, "SubInterval")
        .def_readonly("lo", &SubInterval::lo)
        .def_readonly("hi", &SubInterval::hi)
        .def_property_readonly("label", &SubInterval::label)
        .def_property_readonly("solver", [](const SubInterval& s) { return to_string(s.solver); });

    m.def("classify_regime", &classify_regime, py::arg("params"), py::arg("q0"));
    m.def("fixed_points", [](const QueueParams& p) {
        const FixedPoints fp = fixed_points(p);
        return py::make_tuple(fp.xi1, fp.xi2);
    }, py::arg("params"));
    m.def("apply_impulse", &apply_impulse, py::arg("pre"), py::arg("m"), py::arg("mode"), py::arg("c"));

    m.def("linear_solution", &linear_solution, py::arg("params"), py::arg("q0"), py::arg("t"));
    m.def("linear_steady_bounds", &linear_steady_bounds, py::arg("params"), py::arg("m"), py::arg("delta"));
    m.def("linear_cycle_average", &linear_cycle_average, py::arg("params"), py::arg("m"), py::arg("delta"));

    m.def("erlang_solution", &erlang_solution, py::arg("params"), py::arg("q0"), py::arg("t"));
    m.def("capacity_crossing_time", [](const QueueParams& p, double q0) {
        return capacity_crossing_time(p, q0).value;
    }, py::arg("params"), py::arg("q0"));
    m.def("erlang_steady_bounds", &erlang_steady_bounds, py::arg("params"), py::arg("m"), py::arg("delta"),
          py::arg("mode") = ImpulseMode::FullState);

    m.def("average_queue_length", &average_queue_length, py::arg("params"), py::arg("q0"), py::arg("T"),
          py::arg("tau"), py::arg("m"), py::arg("dynamics") = Dynamics::ErlangA);
    m.def("derivative_average", &derivative_average, py::arg("params"), py::arg("q0"), py::arg("T"),
          py::arg("tau"), py::arg("m"), py::arg("dynamics") = Dynamics::ErlangA);
    m.def("erlang_subintervals", &erlang_subintervals, py::arg("params"), py::arg("q0"), py::arg("T"),
          py::arg("m"));
    m.def("linear_optimal_times", &linear_optimal_times, py::arg("params"), py::arg("q0"), py::arg("T"),
          py::arg("m"));
    m.def("erlang_optimal_times", &erlang_optimal_times, py::arg("params"), py::arg("q0"), py::arg("T"),
          py::arg("m"));

    m.def("integrate_impulsive",
          [](const QueueParams& p, double q0, double horizon, double m_, std::optional<double> delta,
             std::optional<double> tau, ImpulseMode mode, Dynamics dynamics, double rel_tol, double abs_tol,
             double min_density) {
              OracleConfig cfg;
              cfg.rel_tol = rel_tol;
              cfg.abs_tol = abs_tol;
              cfg.min_density = min_density;
              const Trajectory traj = integrate_impulsive(p, q0, make_spec(m_, delta, tau, mode), horizon, cfg,
                                                          dynamics);
              std::vector<double> t, q;
              for (const auto& s : traj.samples) {
                  t.push_back(s.t);
                  q.push_back(s.q);
              }
              std::vector<std::pair<double, std::string>> breaks;
              for (const auto& b : traj.breakpoints) breaks.emplace_back(b.t, to_string(b.kind));
              return py::make_tuple(t, q, breaks);
          },
          py::arg("params"), py::arg("q0"), py::arg("horizon"), py::arg("m") = 1.0, py::arg("delta") = py::none(),
          py::arg("tau") = py::none(), py::arg("mode") = ImpulseMode::FullState,
          py::arg("dynamics") = Dynamics::ErlangA, py::arg("rel_tol") = 1e-10, py::arg("abs_tol") = 1e-12,
          py::arg("min_density") = 1000.0,
          "Returns (t, q, breakpoints); without delta or tau a single impulse is applied at t = 0.");

    m.def("steady_cycle_bounds",
          [](const QueueParams& p, double m_, double delta, ImpulseMode mode, int n_cycles, Dynamics dynamics) {
              const OracleCycle oc = steady_cycle_bounds(p, m_, delta, mode, n_cycles, dynamics);
              return py::make_tuple(oc.bounds, oc.average);
          },
          py::arg("params"), py::arg("m"), py::arg("delta"), py::arg("mode") = ImpulseMode::FullState,
          py::arg("n_cycles") = 50, py::arg("dynamics") = Dynamics::ErlangA);

    m.def("grid_minimize_impulse_time",
          [](const QueueParams& p, double q0, double T, double m_, int n_grid, Dynamics dynamics) {
              const GridMinimum g = grid_minimize_impulse_time(p, q0, T, m_, n_grid, dynamics);
              return py::make_tuple(g.tau, g.J);
          },
          py::arg("params"), py::arg("q0"), py::arg("T"), py::arg("m"), py::arg("n_grid") = 2000,
          py::arg("dynamics") = Dynamics::ErlangA);
}
