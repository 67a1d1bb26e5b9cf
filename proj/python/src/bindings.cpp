// Python bindings. Rationals cross the boundary as fractions.Fraction; ints,
// Fractions and "p/q" or decimal strings are accepted on input. Flow indices
// are 0-based.

#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "iwrr/config.hpp"
#include "iwrr/csv.hpp"
#include "iwrr/errors.hpp"
#include "iwrr/experiments.hpp"
#include "iwrr/service.hpp"
#include "iwrr/sim.hpp"

namespace py = pybind11;
using namespace iwrr;
using namespace pybind11::literals;

namespace pybind11::detail {

template <>
struct type_caster<Rat> {
    PYBIND11_TYPE_CASTER(Rat, const_name("fractions.Fraction"));

    bool load(handle src, bool convert)
    {
        try {
            if (PyBool_Check(src.ptr())) return false;
            if (PyLong_Check(src.ptr())) {
                value = Rat(src.cast<std::int64_t>());
                return true;
            }
            if (py::isinstance<py::str>(src)) {
                value = Rat::parse(src.cast<std::string>());
                return true;
            }
            if (py::hasattr(src, "numerator") && py::hasattr(src, "denominator") && !PyFloat_Check(src.ptr())) {
                value = Rat(src.attr("numerator").cast<std::int64_t>(), src.attr("denominator").cast<std::int64_t>());
                return true;
            }
            if (convert && PyFloat_Check(src.ptr())) {
                // the shortest decimal that round-trips, read exactly
                value = Rat::parse(py::repr(src).cast<std::string>());
                return true;
            }
        } catch (const std::invalid_argument&) {
            throw py::value_error("not a rational number: " + py::repr(src).cast<std::string>());
        }
        return false;
    }

    static handle cast(const Rat& r, return_value_policy, handle)
    {
        static py::object fraction = py::module_::import("fractions").attr("Fraction");
        return fraction(r.num(), r.den()).release();
    }
};

}  // namespace pybind11::detail

namespace {

py::dict familyDict(const RateLatencyFamily& fam)
{
    py::list members;
    for (const FamilyMember& m : fam.members)
        members.append(py::dict("ks"_a = m.ks, "rate"_a = m.rate, "latency"_a = m.latency, "touch"_a = m.touch));
    return py::dict("r_star"_a = fam.rStar, "rks"_a = fam.rks, "k_star"_a = fam.kStar, "members"_a = members);
}

py::dict reportDict(const DelayReport& r)
{
    py::list summary;
    for (const RankSummary& s : r.summary) {
        auto q = [](const Quartiles& x) {
            return py::dict("min"_a = x.min, "q1"_a = x.q1, "median"_a = x.median, "q3"_a = x.q3, "max"_a = x.max);
        };
        summary.append(py::dict("rank"_a = s.rank, "wrr_ms"_a = q(s.wrrMs), "iwrr_ms"_a = q(s.iwrrMs),
                                "diff_ms"_a = q(s.diffMs), "diff_norm"_a = q(s.diffNorm)));
    }
    std::ostringstream samples;
    writeExperimentCsv(samples, r);
    return py::dict("summary"_a = summary, "samples_csv"_a = samples.str(), "systems"_a = r.systems.size());
}

ExperimentConfig experimentConfig(bool randomized, std::uint64_t seed, std::size_t samples, std::size_t systems,
                                  std::optional<Rat> rate, unsigned threads)
{
    ExperimentConfig cfg = randomized ? randomizedDefaults() : ExperimentConfig{};
    cfg.seed = seed;
    cfg.samples = samples;
    cfg.systems = systems;
    cfg.threads = threads;
    if (rate) cfg.arrivalRate = *rate;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Exact service curves, delay bounds and simulation for interleaved weighted round-robin";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);

    // ---- curves ----
    py::class_<Curve>(m, "Curve")
        .def("__call__", &Curve::value, "x"_a)
        .def("left_limit", &Curve::leftLimit, "x"_a)
        .def("right_limit", &Curve::rightLimit, "x"_a)
        .def_property_readonly("transient", &Curve::transient)
        .def_property_readonly("period", &Curve::period)
        .def_property_readonly("increment", &Curve::increment)
        .def_property_readonly("rate", &Curve::rate)
        .def_property_readonly("pieces",
                               [](const Curve& f) {
                                   py::list out;
                                   for (const Piece& p : f.pieces()) out.append(py::make_tuple(p.x, p.value, p.right, p.slope));
                                   return out;
                               })
        .def("breakpoints", &Curve::breakpointsIn, "a"_a, "b"_a)
        .def("is_continuous", &Curve::isContinuous)
        .def("to_csv",
             [](const Curve& f, const Rat& horizon) {
                 std::ostringstream os;
                 writeCurveCsv(os, f, horizon);
                 return os.str();
             },
             "horizon"_a)
        .def("to_aggregate_json", &aggregateJson)
        .def("__eq__", [](const Curve& a, const Curve& b) { return equivalent(a, b); })
        .def("__repr__", &Curve::describe);

    m.def("zero_curve", &zeroCurve);
    m.def("token_bucket", &tokenBucket, "r"_a, "b"_a);
    m.def("stair", &stair, "a"_a, "b"_a);
    m.def("rate_latency", &rateLatency, "r"_a, "latency"_a);
    m.def("unit_rate", &unitRate);
    m.def("piecewise_linear", &piecewiseLinear, "points"_a, "d"_a, "c"_a);
    m.def("shift_right", &shiftRight, "f"_a, "a"_a);
    m.def("add", &add);
    m.def("min_of", py::overload_cast<const Curve&, const Curve&>(&minOf));
    m.def("max_of", py::overload_cast<const Curve&, const Curve&>(&maxOf));
    m.def("convolve_unit_rate", &convolveUnitRate, "f"_a);
    m.def("lower_pseudo_inverse", &lowerPseudoInverse, "f"_a);
    m.def("compose", &compose, "outer"_a, "inner"_a);
    m.def("packetize_ceil", &packetizeCeil, "f"_a, "l"_a);
    m.def("greedy_packet_source", &greedyPacketSource, "r"_a, "b"_a, "l"_a);
    m.def("horizontal_deviation", &horizontalDeviation, "alpha"_a, "beta"_a, "None when unbounded");
    m.def(
        "curve_leq",
        [](const Curve& f, const Curve& g, int periods) {
            LeqResult r = curveLeq(f, g, HorizonSpec{periods});
            return py::make_tuple(r.holds, r.witness);
        },
        "f"_a, "g"_a, "periods"_a = 3, "(holds, witness x with f(x) > g(x))");
    m.def(
        "check_superadditive",
        [](const Curve& f) {
            auto r = checkSuperadditive(f);
            return py::make_tuple(r.holds, r.witness);
        },
        "f"_a);

    // ---- systems ----
    py::class_<FlowSpec>(m, "Flow")
        .def(py::init([](std::int64_t w, const Rat& lmin, const Rat& lmax, std::string name) {
                 return FlowSpec{w, lmin, lmax, std::move(name)};
             }),
             "weight"_a, "lmin"_a, "lmax"_a, "name"_a = "")
        .def_readwrite("weight", &FlowSpec::weight)
        .def_readwrite("lmin", &FlowSpec::lmin)
        .def_readwrite("lmax", &FlowSpec::lmax)
        .def_readwrite("name", &FlowSpec::name);

    py::class_<SystemSpec>(m, "System")
        .def(py::init([](std::vector<FlowSpec> flows, std::optional<Curve> aggregate, const Rat& lipschitz) {
                 SystemSpec s;
                 s.flows = std::move(flows);
                 if (aggregate) s.aggregate = *aggregate;
                 s.lipschitz = lipschitz;
                 validateSystem(s);
                 return s;
             }),
             "flows"_a, "aggregate"_a = py::none(), "lipschitz"_a = 1)
        .def_readonly("flows", &SystemSpec::flows)
        .def_readonly("aggregate", &SystemSpec::aggregate)
        .def_readonly("lipschitz", &SystemSpec::lipschitz);

    m.def("load_config", &parseSystemConfig, "json_text"_a);
    m.def("load_config_file", [](const std::string& path) { return parseSystemConfig(readTextFile(path)); }, "path"_a);

    m.def("phi", &phi, "sys"_a, "i"_a, "j"_a, "p"_a);
    m.def("psi", &psi, "sys"_a, "i"_a, "x"_a);
    m.def("gamma", &iwrr::gamma, "sys"_a, "i"_a);
    m.def("iwrr_service_curve", &iwrrServiceCurve, "sys"_a, "i"_a);
    m.def("wrr_service_curve", &wrrServiceCurve, "sys"_a, "i"_a);
    m.def("rate_latency_family", [](const SystemSpec& s, std::size_t i) { return familyDict(rateLatencyFamily(s, i)); },
          "sys"_a, "i"_a);

    // ---- simulation ----
    py::enum_<Policy>(m, "Policy").value("IWRR", Policy::IWRR).value("WRR", Policy::WRR);

    py::class_<Trace>(m, "Trace")
        .def_property_readonly("records",
                               [](const Trace& t) {
                                   py::list out;
                                   for (const ServiceRecord& r : t.records())
                                       out.append(py::dict("start"_a = r.start, "end"_a = r.end, "flow"_a = r.flow,
                                                           "size"_a = r.size, "round"_a = r.round, "cycle"_a = r.cycle));
                                   return out;
                               })
        .def("input", &Trace::input, "flow"_a, "t"_a)
        .def("output", &Trace::output, "flow"_a, "t"_a)
        .def(
            "max_delay",
            [](const Trace& t, std::size_t flow) {
                DelayMeasurement d = maxPacketDelay(t, flow);
                return py::make_tuple(d.maxDelay, d.unfinished);
            },
            "flow"_a, "(max delay, some packet unfinished)")
        .def(
            "verify_strict_service",
            [](const Trace& t, std::size_t flow, const Curve& beta) {
                StrictServiceReport r = verifyStrictService(t, flow, beta);
                py::list witnesses;
                for (const Violation& v : r.violations) witnesses.append(py::make_tuple(v.s, v.t, v.served, v.required));
                return py::dict("holds"_a = r.holds(), "periods"_a = r.periods, "checks"_a = r.checks,
                                "violations"_a = r.violationCount, "witnesses"_a = witnesses);
            },
            "flow"_a, "beta"_a)
        .def("to_csv", [](const Trace& t) {
            std::ostringstream os;
            writeTraceCsv(os, t);
            return os.str();
        });

    m.def("simulate", [](const std::string& scenarioJson) { return run(parseScenario(scenarioJson)); },
          "scenario_json"_a);
    m.def(
        "tightness",
        [](const SystemSpec& s, std::size_t i, const Rat& tau, Policy p) {
            TightnessSetup st = buildTightnessScenario(s, i, tau, p);
            Trace t = run(st.scenario);
            return py::dict("expected"_a = st.expected, "measured"_a = measuredService(t, st, tau), "s"_a = st.s);
        },
        "sys"_a, "i"_a, "tau"_a, "policy"_a = Policy::IWRR);
    m.def(
        "delay_tightness",
        [](const SystemSpec& s, std::size_t i, const Curve& alpha, Policy p, int mexp) {
            TightnessSetup st = buildDelayTightnessScenario(s, i, alpha, p, mexp);
            Trace t = run(st.scenario);
            DelayMeasurement d = maxPacketDelay(t, st.flow);
            return py::dict("bound"_a = st.expected, "measured"_a = d.maxDelay, "epsilon"_a = st.offset,
                            "unfinished"_a = d.unfinished);
        },
        "sys"_a, "i"_a, "alpha"_a, "policy"_a = Policy::IWRR, "m"_a = 6);

    // ---- experiments ----
    m.def("delay_bound", &delayBound, "sys"_a, "i"_a, "alpha"_a, "policy"_a = Policy::IWRR);
    m.def(
        "run_fixed_experiment",
        [](std::uint64_t seed, std::size_t n, std::optional<Rat> rate, unsigned threads) {
            DelayReport r;
            {
                py::gil_scoped_release release;
                r = runFixedExperiment(experimentConfig(false, seed, n, 1, rate, threads));
            }
            return reportDict(r);
        },
        "seed"_a = 1, "n"_a = 1000, "rate"_a = py::none(), "threads"_a = 0);
    m.def(
        "run_randomized_experiment",
        [](std::uint64_t seed, std::size_t n, std::size_t systems, std::optional<Rat> rate, unsigned threads) {
            DelayReport r;
            {
                py::gil_scoped_release release;
                r = runRandomizedExperiment(experimentConfig(true, seed, n, systems, rate, threads));
            }
            return reportDict(r);
        },
        "seed"_a = 1, "n"_a = 1000, "systems"_a = 200, "rate"_a = py::none(), "threads"_a = 0);
}
