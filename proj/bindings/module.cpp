#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "empiproc/chaining.hpp"
#include "empiproc/core.hpp"
#include "empiproc/empirical.hpp"
#include "empiproc/generators.hpp"
#include "empiproc/limit.hpp"
#include "empiproc/mixing.hpp"

namespace py = pybind11;
using namespace empiproc;

namespace {

py::array_t<double> path_array(const generators::SamplePath& path) {
  py::array_t<double> out({path.n, path.d});
  std::copy(path.values.begin(), path.values.end(), out.mutable_data());
  return out;
}

generators::SamplePath path_from_array(py::array_t<double, py::array::c_style> arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("path must be an (n, d) array");
  generators::SamplePath path;
  path.n = static_cast<std::size_t>(arr.shape(0));
  path.d = static_cast<std::size_t>(arr.shape(1));
  path.values.assign(arr.data(), arr.data() + path.n * path.d);
  return path;
}

std::vector<generators::SamplePath> ensemble_from(const std::vector<py::array_t<double>>& arrays) {
  std::vector<generators::SamplePath> out;
  for (const auto& a : arrays)
    out.push_back(path_from_array(py::array_t<double, py::array::c_style>::ensure(a)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_empiproc, m) {
  m.doc() = "empirical processes of multidimensional dependent data";

  // --- generators ---------------------------------------------------------------

  m.def("validate_torus", [](const std::vector<std::vector<long long>>& matrix) {
    auto aut = generators::validate_torus(matrix);
    py::dict d;
    d["ergodic"] = aut.is_ergodic;
    d["hyperbolic"] = aut.is_hyperbolic;
    d["det_sign"] = aut.det_sign;
    d["jordan_exponent"] = aut.jordan_exponent;
    d["expansion_rate"] = aut.expansion_rate;
    d["eigen_moduli"] = aut.eigen_moduli;
    return d;
  }, py::arg("matrix"));

  m.def("simulate_iid", [](std::size_t d, std::size_t n, std::uint64_t seed, std::uint64_t rep) {
    return path_array(generators::simulate_iid_uniform(d, n, seed, rep));
  }, py::arg("d"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);

  m.def("simulate_torus",
        [](const std::vector<std::vector<long long>>& matrix, std::size_t n, std::uint64_t seed,
           std::uint64_t rep) {
          auto aut = generators::validate_torus(matrix);
          return path_array(generators::simulate_torus(aut, n, seed, rep));
        },
        py::arg("matrix"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);

  m.def("simulate_linear", [](std::size_t d, double theta, std::size_t n, std::uint64_t seed,
                              std::uint64_t rep) {
    auto model = generators::LinearProcessModel::geometric(d, theta);
    return path_array(generators::simulate_linear(model, n, seed, rep));
  }, py::arg("d"), py::arg("theta"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);

  m.def("simulate_lipschitz", [](std::size_t d, std::size_t n, std::uint64_t seed,
                                 std::uint64_t rep) {
    auto model = generators::LipschitzIterationModel::contraction_default(d);
    return path_array(generators::simulate_lipschitz(model, n, seed, rep));
  }, py::arg("d"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);

  m.def("simulate_markov", [](double flip, std::size_t n, std::uint64_t seed, std::uint64_t rep) {
    auto model = generators::FiniteMarkovModel::two_state(flip);
    return path_array(generators::simulate_markov(model, n, seed, rep));
  }, py::arg("flip"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);

  // --- empirical processes -------------------------------------------------------

  m.def("empirical_cdf", [](py::array_t<double> path, const std::vector<Point>& queries) {
    auto p = path_from_array(py::array_t<double, py::array::c_style>::ensure(path));
    auto counts = empirical::count_dominated(p, queries);
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      out[i] = static_cast<double>(counts[i]) / static_cast<double>(p.n);
    return out;
  }, py::arg("path"), py::arg("queries"));

  m.def("sup_gap", [](py::array_t<double> path, std::size_t m) {
    auto p = path_from_array(py::array_t<double, py::array::c_style>::ensure(path));
    auto model = std::make_shared<core::DistributionModel>(
        core::DistributionModel::uniform_cube(p.d));
    auto part = empirical::build_partition(model, m);
    auto approx = empirical::approx_process(p, part, model);
    return empirical::sup_abs_process_gap(p, approx, *model);
  }, py::arg("path"), py::arg("m"), "sup |U_n - U_n^(m)| for the uniform cube model");

  // --- chaining -------------------------------------------------------------------

  m.def("phi", &chaining::phi, py::arg("x"));

  m.def("schedule", [](std::size_t n, double h, double epsilon, std::size_t d) {
    auto sch = chaining::schedule(n, h, epsilon, d);
    py::dict out;
    out["K"] = sch.K;
    out["epsilon_k"] = sch.epsilon_k;
    out["window_ok"] = sch.window_ok;
    out["window_checked"] = sch.window_checked;
    return out;
  }, py::arg("n"), py::arg("h"), py::arg("epsilon"), py::arg("d"));

  m.def("verify_sandwich",
        [](py::array_t<double> path, std::size_t m, double alpha, double epsilon,
           const std::vector<Point>& ts) {
          auto p = path_from_array(py::array_t<double, py::array::c_style>::ensure(path));
          auto model = std::make_shared<core::DistributionModel>(
              core::DistributionModel::uniform_cube(p.d));
          chaining::ChainingSystem system(empirical::build_partition(model, m), alpha, epsilon,
                                          p.n);
          auto rep = chaining::verify_sandwich(system, p, ts);
          py::dict out;
          out["checks"] = rep.checks;
          out["violations"] = rep.violations;
          out["worst_slack"] = rep.worst_slack;
          return out;
        },
        py::arg("path"), py::arg("m"), py::arg("alpha"), py::arg("epsilon"), py::arg("ts"));

  // --- mixing -----------------------------------------------------------------------

  m.def("cosine_covariances",
        [](const std::vector<py::array_t<double>>& ensemble, std::size_t max_gap,
           std::size_t axis) {
          auto ens = ensemble_from(ensemble);
          auto f = mixing::Observable::cosine(axis);
          std::vector<double> covs, errs;
          for (std::size_t k = 1; k <= max_gap; ++k) {
            auto est = mixing::block_covariance(ens, f, {}, k, {});
            covs.push_back(est.estimate);
            errs.push_back(est.stderr_);
          }
          return py::make_tuple(covs, errs);
        },
        py::arg("ensemble"), py::arg("max_gap"), py::arg("axis") = 0);

  m.def("fit_mixing_envelope",
        [](const std::vector<std::size_t>& gaps, const std::vector<double>& covs,
           const std::vector<double>& errs) {
          auto rep = mixing::fit_mixing_envelope(gaps, covs, errs);
          py::dict out;
          out["fitted"] = rep.status == mixing::FitStatus::Fitted;
          out["theta"] = rep.theta_hat;
          out["theta_ci"] = py::make_tuple(rep.theta_ci_low, rep.theta_ci_high);
          out["degree"] = rep.degree;
          return out;
        },
        py::arg("gaps"), py::arg("covariances"), py::arg("stderrs"));

  m.def("spectral_gap_check", [](double flip) {
    auto model = generators::FiniteMarkovModel::two_state(flip);
    auto rep = mixing::spectral_gap_check(model, {{1.0, -1.0}, {1.0, 0.0}});
    py::dict out;
    out["has_gap"] = rep.has_gap;
    out["lambda2"] = rep.lambda2;
    out["theta"] = rep.theta_hat;
    out["envelope_violations"] = rep.envelope_violations;
    return out;
  }, py::arg("flip"));

  // --- limit model --------------------------------------------------------------------

  m.def("estimate_gamma",
        [](const std::vector<py::array_t<double>>& ensemble,
           const std::vector<std::vector<double>>& axes, std::size_t lag) {
          auto ens = ensemble_from(ensemble);
          auto grid = std::make_shared<core::EvaluationGrid>(axes);
          auto model = limit::estimate_gamma(ens, grid, lag);
          std::size_t v = grid->vertex_count();
          py::array_t<double> gamma({v, v});
          std::copy(model.gamma.begin(), model.gamma.end(), gamma.mutable_data());
          py::dict out;
          out["gamma"] = gamma;
          out["min_eigen_pre"] = model.min_eigen_pre;
          out["psd_clip"] = model.psd_clip;
          return out;
        },
        py::arg("ensemble"), py::arg("axes"), py::arg("lag"));
}
