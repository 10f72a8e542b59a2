#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "slh/cli.hpp"
#include "slh/gess.hpp"
#include "slh/hierarchy.hpp"
#include "slh/structfn.hpp"
#include "slh/synth.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1)
        throw slh::Error(slh::ErrorCode::ConfigInvalid, "expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

slh::PriceSeries series_of(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                           const std::string& label) {
    return slh::PriceSeries(to_vector(a), label);
}

slh::AnalysisConfig analysis_config(const std::string& config_json, unsigned workers) {
    const auto doc = config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(config_json);
    return slh::RunConfig::from_json(doc).analysis(workers);
}

} // namespace

PYBIND11_MODULE(_slh, m) {
    m.doc() = "Structure functions, GESS hierarchy estimation and synthetic cascades";

    static py::exception<slh::Error> error(m, "SlhError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const slh::Error& e) {
            py::object exc = error;
            py::object inst = exc(e.what());
            inst.attr("code") = slh::code_name(e.code());
            inst.attr("category") = static_cast<int>(e.category());
            PyErr_SetObject(error.ptr(), inst.ptr());
        }
    });

    m.def("structure_function",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& r, double p) {
              return slh::structure_function(to_vector(r), p);
          },
          py::arg("returns"), py::arg("p"), "Mean of |r|^p.");

    m.def("returns",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& prices, std::size_t tau) {
              return to_array(slh::compute_returns(series_of(prices, ""), tau).values);
          },
          py::arg("prices"), py::arg("tau"), "r(t, tau) = s(t + tau) - s(t).");

    m.def("build_table_json",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& prices, std::vector<double> p,
             std::vector<std::size_t> tau, unsigned workers) {
              const auto series = series_of(prices, "array");
              slh::StructureFunctionTable t;
              {
                  py::gil_scoped_release release;
                  t = slh::build_table(series, slh::MomentGrid{std::move(p), std::move(tau)}, workers);
              }
              return slh::table_to_json(t).dump();
          },
          py::arg("prices"), py::arg("p"), py::arg("tau"), py::arg("workers") = 1);

    m.def("analyze_json",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& prices, const std::string& config,
             unsigned workers, const std::string& label) {
              const auto series = series_of(prices, label);
              const auto cfg = analysis_config(config, workers);
              slh::HierarchyEstimate e;
              {
                  py::gil_scoped_release release;
                  e = slh::analyze(series, cfg);
              }
              return slh::to_json(e).dump();
          },
          py::arg("prices"), py::arg("config") = "", py::arg("workers") = 1, py::arg("label") = "array");

    m.def("theoretical_xi", &slh::theoretical_xi, py::arg("beta"), py::arg("C"), py::arg("h0"), py::arg("p"));
    m.def("theoretical_rho", &slh::theoretical_rho, py::arg("beta"), py::arg("n"), py::arg("p"), py::arg("q"));
    m.def("theoretical_delta_rho_next", &slh::theoretical_delta_rho_next, py::arg("beta"), py::arg("n"),
          py::arg("q"), py::arg("delta_p"), py::arg("delta_rho"));
    m.def("gamma", &slh::gamma, py::arg("beta"), py::arg("p"), py::arg("q"));

    m.def("generate_cascade",
          [](double beta, double C, double h0, int levels, std::uint64_t seed) {
              slh::SyntheticSeries s = [&] {
                  py::gil_scoped_release release;
                  return slh::generate_cascade({beta, C, h0, levels, seed});
              }();
              return to_array(s.series.values());
          },
          py::arg("beta"), py::arg("C"), py::arg("h0") = 0.0, py::arg("levels"), py::arg("seed"));

    m.def("generate_fbm",
          [](double H, std::size_t length, std::uint64_t seed) {
              return to_array(slh::generate_fbm(H, length, seed).series.values());
          },
          py::arg("H"), py::arg("length"), py::arg("seed"));

    m.def("run_cli",
          [](std::vector<std::string> args) {
              args.insert(args.begin(), "slh");
              std::vector<char*> argv;
              for (auto& a : args)
                  argv.push_back(a.data());
              return slh::run_cli(static_cast<int>(argv.size()), argv.data());
          },
          py::arg("args"), "Run the command line front end; returns the exit code.");
}
