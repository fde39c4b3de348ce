#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hitmap/bench.hpp"
#include "hitmap/errors.hpp"
#include "hitmap/planner.hpp"
#include "hitmap/scenarios.hpp"
#include "hitmap/serialization.hpp"

namespace py = pybind11;
using namespace hitmap;

namespace {

// JSON crosses the boundary as text; the Python side parses it.
struct RunSummary {
    std::string outcome;
    std::string reason;
    int frames = 0;
    int goals_reached = 0;
    int submaps = 0;
    int first_unvalidated_plan_frame = -1;
    std::uint64_t baseline_replayed_writes = 0;
    std::vector<std::string> metrics;
    std::vector<py::dict> loops;
    std::vector<std::pair<double, double>> true_path;
    std::string topology;
};

RunSummary summarize(const RunResult& r) {
    RunSummary s;
    s.outcome = std::string(to_string(r.outcome));
    s.reason = r.reason;
    s.frames = r.frames;
    s.goals_reached = r.goals_reached;
    s.submaps = static_cast<int>(r.store.size());
    s.first_unvalidated_plan_frame = r.first_unvalidated_plan_frame;
    s.baseline_replayed_writes = r.baseline_replayed_writes;
    for (const auto& m : r.metrics) s.metrics.push_back(to_json(m).dump());
    for (const auto& l : r.loops) {
        py::dict d;
        d["frame"] = l.frame;
        d["current"] = l.current;
        d["candidate"] = l.candidate;
        d["accepted"] = l.accepted;
        d["validated"] = l.validated;
        d["crosses_obstacle"] = l.crosses_obstacle;
        d["corrected_submaps"] = l.corrected_submaps;
        s.loops.push_back(std::move(d));
    }
    for (const Vec2& p : r.true_path) s.true_path.emplace_back(p.x, p.y);
    s.topology = to_json(r.topology).dump();
    return s;
}

RunSummary run(const World& world, const std::string& config_json, const std::string& out_dir, bool baseline) {
    const ScenarioConfig cfg = config_from_json(nlohmann::json::parse(config_json));
    RunOptions opts{out_dir, true};
    RunResult r;
    {
        py::gil_scoped_release release;
        r = baseline ? run_baseline(world, cfg, opts) : run_scenario(world, cfg, opts);
    }
    return summarize(r);
}

}  // namespace

PYBIND11_MODULE(_hitmap, m) {
    m.doc() = "Hierarchical topological mapping and planning core";

    py::register_exception<Error>(m, "HitmapError");

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("__eq__", [](Vec2 a, Vec2 b) { return a == b; })
        .def("__repr__", [](Vec2 v) { return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")"; });

    py::enum_<Frame>(m, "Frame")
        .value("GroundTruth", Frame::GroundTruth)
        .value("Odometry", Frame::Odometry)
        .value("Corrected", Frame::Corrected);

    py::class_<Pose2>(m, "Pose2")
        .def(py::init<double, double, double, Frame>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
             py::arg("theta") = 0.0, py::arg("frame") = Frame::GroundTruth)
        .def_property_readonly("x", &Pose2::x)
        .def_property_readonly("y", &Pose2::y)
        .def_property_readonly("theta", &Pose2::theta)
        .def_property_readonly("frame", &Pose2::frame)
        .def("compose", &Pose2::compose)
        .def("inverse", &Pose2::inverse)
        .def("between", &Pose2::between)
        .def("transform", &Pose2::transform)
        .def("in_frame", &Pose2::in_frame)
        .def("__mul__", [](const Pose2& a, const Pose2& b) { return a * b; })
        .def("__eq__", [](const Pose2& a, const Pose2& b) { return a == b; })
        .def("__repr__", [](const Pose2& p) {
            return "Pose2(" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ", " + std::to_string(p.theta()) +
                   ", " + std::string(to_string(p.frame())) + ")";
        });

    py::class_<World>(m, "World")
        .def_property_readonly("width", &World::width)
        .def_property_readonly("height", &World::height)
        .def_property_readonly("resolution", &World::resolution)
        .def("is_obstacle", [](const World& w, double x, double y) { return w.is_obstacle({x, y}); })
        .def("to_ascii", [](const World& w) { return to_ascii(w); });
    m.def("load_world", &load_world, py::arg("path"));
    m.def("parse_ascii_world", &parse_ascii_world, py::arg("text"));

    m.def("scenario_names", &builtin_scenario_names);
    m.def(
        "builtin_scenario",
        [](const std::string& name) {
            Scenario s = builtin_scenario(name);
            return py::make_tuple(std::move(s.world), to_json(s.config).dump());
        },
        py::arg("name"), "(world, config JSON text) of a built-in scenario");

    py::class_<RunSummary>(m, "RunSummary")
        .def_readonly("outcome", &RunSummary::outcome)
        .def_readonly("reason", &RunSummary::reason)
        .def_readonly("frames", &RunSummary::frames)
        .def_readonly("goals_reached", &RunSummary::goals_reached)
        .def_readonly("submaps", &RunSummary::submaps)
        .def_readonly("first_unvalidated_plan_frame", &RunSummary::first_unvalidated_plan_frame)
        .def_readonly("baseline_replayed_writes", &RunSummary::baseline_replayed_writes)
        .def_readonly("metrics_json", &RunSummary::metrics)
        .def_readonly("loops", &RunSummary::loops)
        .def_readonly("true_path", &RunSummary::true_path)
        .def_readonly("topology_json", &RunSummary::topology);
    m.def("run", &run, py::arg("world"), py::arg("config_json"), py::arg("out_dir") = std::string(),
          py::arg("baseline") = false);

    m.def(
        "frontier_utility",
        [](Vec2 f, Vec2 goal, std::optional<Vec2> last, double w_d, double w_l) {
            PlannerState st;
            st.last_waypoint = last;
            return frontier_utility(f, goal, st, CostWeights{w_d, w_l});
        },
        py::arg("frontier"), py::arg("goal"), py::arg("last_waypoint") = std::nullopt, py::arg("w_d") = 0.8,
        py::arg("w_l") = 0.2);
    m.def("least_squares_slope", &least_squares_slope, py::arg("ys"));
    m.def("exit_code", [](const std::string& outcome) {
        if (outcome == "reached") return exit_code(Outcome::Reached);
        if (outcome == "timeout") return exit_code(Outcome::Timeout);
        if (outcome == "stuck") return exit_code(Outcome::Stuck);
        throw py::value_error("unknown outcome " + outcome);
    });
}
