// Python surface for the qsd core: simulation, reinforced runs, the
// finite-chain lab, and the analytic references.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsd/apt.hpp"
#include "qsd/chain.hpp"
#include "qsd/chain_reinforced.hpp"
#include "qsd/config.hpp"
#include "qsd/errors.hpp"
#include "qsd/experiment.hpp"
#include "qsd/fd_eigensolver.hpp"
#include "qsd/flow.hpp"
#include "qsd/ks.hpp"
#include "qsd/references.hpp"
#include "qsd/registry.hpp"
#include "qsd/reinforced.hpp"
#include "qsd/simulate.hpp"
#include "qsd/spectral.hpp"

namespace py = pybind11;
using namespace qsd;

namespace {

ModelParams params_from_kwargs(double drift_c, double domain_a, double domain_b,
                               const std::vector<double>& drift_coeffs,
                               const std::vector<double>& diffusion_coeffs) {
  ModelParams p;
  p.drift_c = drift_c;
  p.domain_a = domain_a;
  p.domain_b = domain_b;
  p.drift_coeffs = drift_coeffs;
  p.diffusion_coeffs = diffusion_coeffs;
  return p;
}

py::array_t<double> flat_to_2d(const std::vector<double>& flat, int dim) {
  const py::ssize_t rows = static_cast<py::ssize_t>(flat.size()) / dim;
  py::array_t<double> arr({rows, static_cast<py::ssize_t>(dim)});
  std::copy(flat.begin(), flat.end(), arr.mutable_data());
  return arr;
}

std::function<double(std::span<const double>)> wrap_scalar_fn(const py::object& f) {
  if (f.is_none())
    return [](std::span<const double>) { return 1.0; };
  return [f](std::span<const double> x) {
    py::gil_scoped_acquire gil;
    if (x.size() == 1) return f(x[0]).cast<double>();
    py::tuple t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = x[i];
    return f(*t).cast<double>();
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Occupation-measure reinforced absorbed diffusions and their exact "
            "finite-chain counterparts";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);

  // ---- models & domains ----
  py::class_<ModelInstance>(m, "Model")
      .def_property_readonly("name", [](const ModelInstance& mi) { return mi.name; })
      .def_property_readonly("dim", [](const ModelInstance& mi) { return mi.model.dim; })
      .def_property_readonly("interior_point",
                             [](const ModelInstance& mi) { return mi.domain.interior_point; })
      .def("contains",
           [](const ModelInstance& mi, const std::vector<double>& x) {
             return mi.domain.contains(x);
           })
      .def("boundary_distance", [](const ModelInstance& mi, const std::vector<double>& x) {
        return mi.domain.boundary_distance(x);
      });

  m.def(
      "make_model",
      [](const std::string& name, double drift_c, double domain_a, double domain_b,
         const std::vector<double>& drift_coeffs, const std::vector<double>& diffusion_coeffs) {
        return make_builtin_model(
            name, params_from_kwargs(drift_c, domain_a, domain_b, drift_coeffs,
                                     diffusion_coeffs));
      },
      py::arg("name"), py::arg("drift_c") = 0.0, py::arg("domain_a") = 0.0,
      py::arg("domain_b") = 1.0, py::arg("drift_coeffs") = std::vector<double>{},
      py::arg("diffusion_coeffs") = std::vector<double>{});
  m.def("builtin_model_names", &builtin_model_names);

  // ---- absorbed paths & Green MC ----
  py::class_<AbsorbedPath>(m, "AbsorbedPath")
      .def_property_readonly("states",
                             [](const AbsorbedPath& p) { return flat_to_2d(p.states, p.dim); })
      .def_readonly("dt", &AbsorbedPath::dt)
      .def_readonly("absorption_time", &AbsorbedPath::absorption_time)
      .def_readonly("hit_fraction", &AbsorbedPath::hit_fraction);

  m.def(
      "simulate_path",
      [](const ModelInstance& mi, const std::vector<double>& x0, double dt, std::uint64_t seed,
         std::uint64_t max_steps) {
        RngStream rng(seed);
        SimOptions opts;
        opts.max_steps = max_steps;
        return simulate_until_absorption(mi.model, mi.domain, x0, dt, rng, opts);
      },
      py::arg("model"), py::arg("x0"), py::arg("dt"), py::arg("seed") = 1,
      py::arg("max_steps") = 1'000'000'000ULL,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "estimate_green_mc",
      [](const ModelInstance& mi, const std::vector<double>& x, const py::object& f,
         std::size_t n_samples, double dt, std::uint64_t seed) {
        const auto fn = wrap_scalar_fn(f);
        McEstimate est;
        {
          py::gil_scoped_release release;
          est = estimate_green_mc(mi.model, mi.domain, x, fn, n_samples, dt, seed);
        }
        return py::make_tuple(est.estimate, est.std_error);
      },
      py::arg("model"), py::arg("x"), py::arg("f") = py::none(), py::arg("n_samples") = 1000,
      py::arg("dt") = 1e-3, py::arg("seed") = 1);

  // ---- reinforced runs ----
  py::class_<ReinforcedTrace>(m, "ReinforcedTrace")
      .def_property_readonly("theta",
                             [](const ReinforcedTrace& t) { return py::cast(t.theta); })
      .def_property_readonly(
          "resample_points",
          [](const ReinforcedTrace& t) { return flat_to_2d(t.resample_points, t.dim); })
      .def_property_readonly("occupation_states",
                             [](const ReinforcedTrace& t) {
                               return flat_to_2d(
                                   {t.occupation.states_flat().begin(),
                                    t.occupation.states_flat().end()},
                                   t.dim);
                             })
      .def_property_readonly("occupation_weights",
                             [](const ReinforcedTrace& t) {
                               return py::cast(std::vector<double>(
                                   t.occupation.weights().begin(),
                                   t.occupation.weights().end()));
                             })
      .def("lambda0_estimate", [](const ReinforcedTrace& t) { return lambda0_estimate(t); })
      .def("n_cycles", &ReinforcedTrace::n_cycles);

  m.def(
      "run_reinforced",
      [](const ModelInstance& mi, const std::vector<double>& x0, double dt,
         std::size_t n_cycles, std::uint64_t seed, std::size_t thin, double eta_boundary) {
        ReinforcedOptions opts;
        opts.thin = thin;
        opts.eta_boundary = eta_boundary;
        const std::vector<double> start = x0.empty() ? mi.domain.interior_point : x0;
        return run_reinforced(mi.model, mi.domain, start, dt, n_cycles, seed, opts);
      },
      py::arg("model"), py::arg("x0") = std::vector<double>{}, py::arg("dt") = 1e-3,
      py::arg("n_cycles") = 100, py::arg("seed") = 1, py::arg("thin") = 1,
      py::arg("eta_boundary") = 0.05, py::call_guard<py::gil_scoped_release>());

  m.def(
      "boundary_layer_mass",
      [](const ReinforcedTrace& t, const ModelInstance& mi, double eta) {
        return boundary_layer_mass(t.occupation, mi.domain, eta);
      },
      py::arg("trace"), py::arg("model"), py::arg("eta"));

  // ---- finite chains ----
  py::class_<AbsorbingChain>(m, "AbsorbingChain")
      .def(py::init<Eigen::MatrixXd>())
      .def_property_readonly("Q", &AbsorbingChain::Q)
      .def_property_readonly("absorb_rate", &AbsorbingChain::absorb_rate)
      .def_property_readonly("n", &AbsorbingChain::n)
      .def_property_readonly("irreducible", &AbsorbingChain::irreducible);
  m.def("load_chain", &AbsorbingChain::load_file, py::arg("path"));
  m.def(
      "random_chain",
      [](int n, std::uint64_t seed) {
        RngStream rng(seed);
        return random_chain(n, rng);
      },
      py::arg("n"), py::arg("seed") = 1);

  py::class_<SpectralData>(m, "SpectralData")
      .def_readonly("lambda0", &SpectralData::lambda0)
      .def_readonly("alpha", &SpectralData::alpha)
      .def_readonly("eta", &SpectralData::eta)
      .def_readonly("gamma", &SpectralData::gamma);
  m.def("spectral", &spectral);
  m.def("green", &green);
  m.def("semigroup", &semigroup, py::arg("chain"), py::arg("t"));
  m.def("conditional_law", &conditional_law, py::arg("chain"), py::arg("mu"), py::arg("t"));
  m.def("green_power", &green_power, py::arg("chain"), py::arg("mu"), py::arg("f"),
        py::arg("n"));
  m.def("tv_distance", &tv_distance);

  py::class_<A1A2Result>(m, "A1A2Result")
      .def_readonly("ok", &A1A2Result::ok)
      .def_readonly("c1", &A1A2Result::c1)
      .def_readonly("nu", &A1A2Result::nu)
      .def_readonly("c2", &A1A2Result::c2)
      .def_readonly("note", &A1A2Result::note);
  m.def("check_A1_A2", &check_A1_A2, py::arg("chain"), py::arg("t0"));

  py::class_<DecayReport>(m, "DecayReport")
      .def_readonly("xs", &DecayReport::xs)
      .def_readonly("distances", &DecayReport::distances)
      .def_readonly("fitted_slope", &DecayReport::fitted_slope)
      .def_readonly("bound_slope", &DecayReport::bound_slope)
      .def_readonly("reduced_window", &DecayReport::reduced_window)
      .def_readonly("passed", &DecayReport::pass);
  m.def("verify_powers_bound", &verify_powers_bound, py::arg("chain"), py::arg("mu"),
        py::arg("n_max") = 30, py::arg("fit_lo") = 0, py::arg("fit_hi") = 0,
        py::arg("floor") = 1e-250);
  m.def("verify_exp_flow_bound", &verify_exp_flow_bound, py::arg("chain"), py::arg("mu"),
        py::arg("t_grid") = std::vector<double>{}, py::arg("floor") = 1e-250);

  py::class_<FlowTrajectory>(m, "FlowTrajectory")
      .def_readonly("times", &FlowTrajectory::times)
      .def_readonly("states", &FlowTrajectory::states)
      .def_readonly("tv_vs_closed_form", &FlowTrajectory::tv_vs_closed_form)
      .def_readonly("max_tv", &FlowTrajectory::max_tv);
  m.def("flow_ode", &flow_ode, py::arg("chain"), py::arg("nu"), py::arg("T"),
        py::arg("tol") = 1e-10, py::arg("n_out") = 101,
        py::call_guard<py::gil_scoped_release>());

  py::class_<ChainTrace>(m, "ChainTrace")
      .def_readonly("theta", &ChainTrace::theta)
      .def_readonly("resample_states", &ChainTrace::resample_states)
      .def_readonly("occupation_time", &ChainTrace::occupation_time)
      .def("lambda0_estimate", &ChainTrace::lambda0_estimate)
      .def("eta_counts", &ChainTrace::eta_counts);
  m.def(
      "reinforced_chain",
      [](const AbsorbingChain& chain, std::size_t n_cycles, std::uint64_t seed,
         int start_state) {
        RngStream rng(seed);
        return reinforced_chain(chain, n_cycles, rng, start_state);
      },
      py::arg("chain"), py::arg("n_cycles"), py::arg("seed") = 1, py::arg("start_state") = 0,
      py::call_guard<py::gil_scoped_release>());

  py::class_<AptReport>(m, "AptReport")
      .def_readonly("window_start", &AptReport::window_start)
      .def_readonly("sup_tv", &AptReport::sup_tv);
  m.def("apt_check", &apt_check, py::arg("trace"), py::arg("chain"), py::arg("T"),
        py::arg("t_grid"), py::arg("s_points") = 64,
        py::call_guard<py::gil_scoped_release>());

  // ---- references & oracles ----
  py::class_<ReferenceQSD>(m, "ReferenceQSD")
      .def_readonly("name", &ReferenceQSD::name)
      .def_readonly("lambda0", &ReferenceQSD::lambda0)
      .def_readonly("provenance", &ReferenceQSD::provenance)
      .def("cdf", [](const ReferenceQSD& r, double x) { return r.cdf(x); })
      .def("density", [](const ReferenceQSD& r, double x) { return r.density(x); });
  m.def("reference_bm_interval", &reference_bm_interval);
  m.def("reference_bm_disk", &reference_bm_disk);
  m.def("bessel_j0_first_zero", &bessel_j0_first_zero);

  py::class_<FdResult>(m, "FdResult")
      .def_readonly("lambda0", &FdResult::lambda0)
      .def_readonly("nodes", &FdResult::nodes)
      .def_readonly("density", &FdResult::density);
  m.def(
      "fd_eigensolver",
      [](const std::string& name, int grid, double drift_c) {
        ModelParams p;
        p.drift_c = drift_c;
        return fd_eigensolver(name, grid, p);
      },
      py::arg("name"), py::arg("grid") = 256, py::arg("drift_c") = 0.0,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "ks_to_reference",
      [](const std::vector<double>& points, const std::vector<double>& weights,
         const std::string& reference) {
        const ReferenceQSD ref = reference_by_name(reference);
        return ks_distance(points, weights, ref.cdf);
      },
      py::arg("points"), py::arg("weights") = std::vector<double>{}, py::arg("reference"));
  m.def(
      "ks_distance",
      [](const std::vector<double>& points, const std::vector<double>& weights,
         const std::function<double(double)>& cdf) { return ks_distance(points, weights, cdf); },
      py::arg("points"), py::arg("weights"), py::arg("cdf"));

  // ---- experiment runner ----
  m.def(
      "run_experiment_config",
      [](const std::string& text) {
        const ExperimentConfig cfg = parse_config(text);
        const ExperimentResult res = run_experiment(cfg);
        py::list artifacts;
        for (const auto& a : res.artifacts) artifacts.append(a);
        return py::make_tuple(res.exit_status, artifacts);
      },
      py::arg("config_text"));
}
