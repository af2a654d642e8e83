#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "risec/experiment.hpp"
#include "risec/oracle.hpp"

namespace py = pybind11;
using namespace risec;

namespace {

// dicts cross the boundary as JSON text; the payloads are small
nlohmann::json to_cpp(const py::object& o) {
    if (o.is_none()) return nlohmann::json::object();
    const auto text = py::module_::import("json").attr("dumps")(o).cast<std::string>();
    return nlohmann::json::parse(text);
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

struct Instance {
    Scene scene;
    ChannelSet channels;
    Problem problem;
};

std::unique_ptr<Instance> instance(const py::object& scene, std::uint64_t channel_seed, double upsilon, double rel) {
    auto in = std::make_unique<Instance>();
    in->scene = scene_from_json(to_cpp(scene));
    in->channels = build_channels(in->scene, channel_seed);
    in->problem = make_problem(in->scene, in->channels, HardwareProfile{upsilon},
                               UncertaintyModel::relative(in->channels, rel, rel));
    return in;
}

nlohmann::json sweep_json(const RunResult& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points)
        pts.push_back({{"x", p.x},
                       {"mean_secrecy", p.mean_secrecy},
                       {"mean_certified", p.mean_certified},
                       {"feasible_fraction", p.feasible_fraction},
                       {"mean_iters", p.mean_iters}});
    return {{"kind", to_string(r.experiment.kind)}, {"config_hash", config_hash(r.experiment)},
            {"points", pts},                        {"trend_metric", r.trend_metric},
            {"spearman_rho", r.spearman_rho},       {"trend_pass", r.trend_pass},
            {"notices", r.notices}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "RIS secrecy beamforming: scenes, AO solver, oracle and sweeps";
    py::register_exception<Error>(m, "RisecError", PyExc_ValueError);

    m.def(
        "default_scene",
        [](int users, int eves, std::uint64_t placement_seed) {
            Placement pl;
            pl.seed = placement_seed;
            return to_py(scene_to_json(Scene::defaults(users, eves, pl)));
        },
        py::arg("users"), py::arg("eves"), py::arg("placement_seed") = 7);

    m.def(
        "solve",
        [](const py::object& scene, std::uint64_t channel_seed, double upsilon, double rel, const py::object& ao) {
            const auto in = instance(scene, channel_seed, upsilon, rel);
            const AoConfig cfg = ao.is_none() ? AoConfig{} : ao_config_from_json(to_cpp(ao));
            AoResult r;
            {
                py::gil_scoped_release nogil;
                r = ao_solve(in->problem, cfg);
            }
            return to_py(to_json(r));
        },
        py::arg("scene"), py::arg("channel_seed") = 1, py::arg("upsilon") = 0.0, py::arg("rel") = 0.05,
        py::arg("ao") = py::none());

    m.def(
        "oracle",
        [](const py::object& scene, std::uint64_t channel_seed, double upsilon, double rel, int phase_levels,
           int power_steps) {
            const auto in = instance(scene, channel_seed, upsilon, rel);
            OracleConfig cfg;
            cfg.phase_levels = phase_levels;
            cfg.power_steps = power_steps;
            OracleResult r;
            {
                py::gil_scoped_release nogil;
                r = grid_search(in->problem, cfg);
            }
            return to_py(to_json(r, cfg));
        },
        py::arg("scene"), py::arg("channel_seed") = 1, py::arg("upsilon") = 0.0, py::arg("rel") = 0.05,
        py::arg("phase_levels") = 16, py::arg("power_steps") = 16);

    m.def(
        "cascade_error",
        [](const py::object& scene, std::uint64_t channel_seed, const RVec& phases) {
            const auto in = instance(scene, channel_seed, 0.0, 0.0);
            const ChannelSet& ch = in->channels;
            if (phases.size() != ch.ris_elements()) throw Error(ErrorKind::Dimension, "one phase per RIS element");
            CVec theta(phases.size());
            for (Eigen::Index i = 0; i < phases.size(); ++i) theta(i) = std::polar(1.0, phases(i));
            double worst = 0.0;
            for (int k = 0; k < ch.num_users(); ++k) {
                const CMat direct = ch.h_rk[k].adjoint() * theta.asDiagonal() * ch.h_br;
                worst = std::max(worst, (apply_cascade(ch.g_k[k], theta, ch.bs_antennas()) - direct).norm() / direct.norm());
            }
            return worst;
        },
        py::arg("scene"), py::arg("channel_seed"), py::arg("phases"),
        "Worst relative gap between the lifted cascade and the direct product over users.");

    m.def("steering_ula", &steering_ula, py::arg("n"), py::arg("spacing"), py::arg("wavelength"),
          py::arg("direction_cosine"));

    m.def(
        "wilson_interval", [](int s, int n) { return wilson_interval(s, n); }, py::arg("successes"),
        py::arg("trials"));

    m.def(
        "run_sweep",
        [](const py::object& config) {
            const Experiment e = experiment_from_json(to_cpp(config));
            RunResult r;
            {
                py::gil_scoped_release nogil;
                r = run_sweep(e);
            }
            return to_py(sweep_json(r));
        },
        py::arg("config"), "Run a power, RIS or threshold sweep and return its summary.");

    m.def(
        "config_hash", [](const py::object& config) { return config_hash(experiment_from_json(to_cpp(config))); },
        py::arg("config"));

    m.def("default_experiment", [](const std::string& kind) {
        return to_py(to_json(Experiment::defaults(experiment_kind_from_string(kind))));
    });
}
