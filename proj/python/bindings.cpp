#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "flexopt/metrics.hpp"
#include "flexopt/scenario_engine.hpp"

namespace py = pybind11;
using namespace flexopt;

namespace {

Dataset load_source(const std::optional<std::string>& dataset, std::optional<std::uint64_t> seed, std::size_t horizon) {
    if (dataset && seed) throw InvalidParameter("give either dataset or synth_seed, not both");
    if (dataset) return load_bundle(*dataset);
    if (!seed) throw InvalidParameter("no data source: give dataset or synth_seed");
    return generate_synthetic_dataset(*seed, horizon);
}

py::dict metric_dict(const MetricSet& m) {
    py::dict d;
    auto put = [&](const char* k, const std::optional<double>& v) { d[k] = v ? py::cast(*v) : py::none(); };
    put("ewap", m.ewap);
    put("twap", m.twap);
    put("ewacef", m.ewacef);
    put("twacef", m.twacef);
    put("pi_rate", m.pi_rate);
    put("eps_rate", m.eps_rate);
    put("omega", m.omega);
    put("tcer", m.tcer);
    put("ecer", m.ecer);
    d["peak_buy"] = m.peak_buy;
    d["volume_buy"] = m.volume_buy;
    return d;
}

std::string run_study_json(const std::optional<std::string>& dataset, std::optional<std::uint64_t> synth_seed,
                           std::size_t horizon, const std::vector<std::string>& contexts,
                           const std::vector<std::string>& scenarios, double mip_gap, int jobs) {
    const Dataset ds = load_source(dataset, synth_seed, horizon);
    StudyOptions opts;
    opts.solve.mip_gap = mip_gap;
    opts.jobs = jobs;
    StudyResult s;
    {
        py::gil_scoped_release release;
        s = run_study(ds, select_contexts(contexts, ds.prices), select_scenarios(scenarios), opts);
    }
    s.dataset_label = dataset ? *dataset : "synthetic seed " + std::to_string(*synth_seed);
    return study_to_json(s);
}

py::dict export_cell_mps(const std::optional<std::string>& dataset, std::optional<std::uint64_t> synth_seed,
                         std::size_t horizon, const std::string& context, const std::string& scenario,
                         const std::filesystem::path& out) {
    const Dataset ds = load_source(dataset, synth_seed, horizon);
    const auto ctx = select_contexts({context}, ds.prices).at(0);
    const ScenarioConfig sc = scenario_preset(scenario);
    BuildOptions bo;
    if (sc.chp_fixed_to_ref) {
        auto [ref_model, ref_build] = build_model(ds, scenario_preset("REF"), ctx);
        const SolveResult ref = solve(ref_model);
        if (!ref.has_values()) throw SolverError("REF did not solve; cannot pin the CHP");
        auto chp = chp_dispatch(ref_model, ref);
        bo.ref_chp_dispatch = chp ? *chp : TimeSeries(std::vector<double>(ds.horizon(), 0.0));
    }
    auto [model, build] = build_model(ds, sc, ctx, bo);
    export_mps(model, out);
    const MpsSummary ref = read_mps_reference(out);
    py::dict d;
    d["num_variables"] = model.num_variables();
    d["num_constraints"] = model.num_constraints();
    d["num_nonzeros"] = model.num_nonzeros();
    d["num_binaries"] = model.num_binaries();
    d["reference_num_variables"] = ref.num_variables;
    d["reference_num_nonzeros"] = ref.num_nonzeros;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-energy system flexibility optimisation";

    static py::handle error_type = py::register_exception<Error>(m, "FlexoptError", PyExc_RuntimeError).ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type, (e.kind() + ": " + e.what()).c_str());
        }
    });

    m.def("scenario_names", [] {
        std::vector<std::string> out;
        for (const auto& s : scenario_presets()) out.push_back(s.name);
        return out;
    });
    m.def("context_names", [] { return std::vector<std::string>{"c_base", "c_strict", "c_scaled"}; });
    m.def("annuity_factor", &annuity_factor, py::arg("r"), py::arg("n"));

    m.def("synth", [](std::uint64_t seed, std::size_t horizon, const std::filesystem::path& out) {
        save_bundle(generate_synthetic_dataset(seed, horizon), out);
    }, py::arg("seed"), py::arg("horizon"), py::arg("out"));

    m.def("metrics", [](const std::vector<double>& prices, const std::vector<double>& cefs,
                        const std::vector<double>& purchase, double dt) {
        return metric_dict(compute_metrics(TimeSeries(prices, dt), TimeSeries(cefs, dt), TimeSeries(purchase, dt), dt));
    }, py::arg("prices"), py::arg("cefs"), py::arg("purchase"), py::arg("dt") = 1.0);

    m.def("run_study_json", &run_study_json, py::arg("dataset") = py::none(), py::arg("synth_seed") = py::none(),
          py::arg("horizon") = 168, py::arg("contexts") = std::vector<std::string>{},
          py::arg("scenarios") = std::vector<std::string>{}, py::arg("mip_gap") = 0.0, py::arg("jobs") = 1);

    m.def("export_mps", &export_cell_mps, py::arg("dataset") = py::none(), py::arg("synth_seed") = py::none(),
          py::arg("horizon") = 168, py::arg("context") = "c_base", py::arg("scenario") = "fullFlex",
          py::arg("out") = "cell.mps");
}
