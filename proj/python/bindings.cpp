#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "permtest/engine.hpp"
#include "permtest/features.hpp"
#include "permtest/io.hpp"
#include "permtest/simstudy.hpp"

namespace py = pybind11;
using namespace permtest;

namespace {

GofStatistic statistic_named(const std::string& name) {
  if (name == "r2") return GofStatistic::r_squared();
  if (name == "tstar") return GofStatistic::pesarin();
  if (name == "abs-risk") return GofStatistic::absolute_risk();
  if (name == "huber-risk") return GofStatistic::huber_risk();
  throw Error(ErrorKind::InvalidConfig, "unknown statistic '" + name + "'");
}

RankMethod rank_named(const std::string& name) {
  if (name == "spearman") return RankMethod::Spearman;
  if (name == "kendall") return RankMethod::Kendall;
  throw Error(ErrorKind::InvalidConfig, "unknown rank method '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  using namespace pybind11::literals;
  m.doc() = "Permutation test of whether a regression model class fits more than noise";

  static py::exception<Error> error_type(m, "PermtestError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("predictors", &Dataset::predictors)
      .def_property_readonly("responses", &Dataset::responses)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d", &Dataset::d);

  m.def("validate_dataset", py::overload_cast<Matrix, Vector>(&validate_dataset), "predictors"_a, "responses"_a);

  py::class_<TestConfig>(m, "TestConfig")
      .def(py::init([](double alpha, std::size_t n_permutations, std::uint64_t master_seed, bool exhaustive) {
             return TestConfig{alpha, n_permutations, master_seed, exhaustive};
           }),
           "alpha"_a = 0.05, "n_permutations"_a = 200, "master_seed"_a = 0, "exhaustive"_a = false)
      .def_readwrite("alpha", &TestConfig::alpha)
      .def_readwrite("n_permutations", &TestConfig::n_permutations)
      .def_readwrite("master_seed", &TestConfig::master_seed)
      .def_readwrite("exhaustive", &TestConfig::exhaustive);

  py::class_<RegressorSpec>(m, "RegressorSpec")
      .def_static("ols", &RegressorSpec::ols)
      .def_static("mlp", &RegressorSpec::mlp, "layers"_a = std::vector<std::size_t>{30, 30, 30}, "epochs"_a = 500,
                  "learning_rate"_a = 0.01)
      .def_property_readonly("name", &RegressorSpec::name)
      .def_readwrite("mlp_layers", &RegressorSpec::mlp_layers)
      .def_readwrite("mlp_epochs", &RegressorSpec::mlp_epochs)
      .def_readwrite("mlp_learning_rate", &RegressorSpec::mlp_learning_rate);

  py::class_<FittedModel>(m, "FittedModel")
      .def_property_readonly("kind", [](const FittedModel& f) { return f.kind == ModelKind::Ols ? "ols" : "mlp"; })
      .def_readonly("parameters", &FittedModel::parameters)
      .def_readonly("initial_loss", &FittedModel::initial_loss)
      .def_readonly("final_loss", &FittedModel::final_loss);

  m.def("ols_fit", py::overload_cast<const Dataset&>(&ols_fit), "data"_a);
  m.def(
      "mlp_fit",
      [](const Dataset& data, const RegressorSpec& spec, std::uint64_t seed) {
        return mlp_fit(data, spec, RngPolicy(seed).stream(0, "fit"));
      },
      "data"_a, "spec"_a, "seed"_a = 0);
  m.def("predict", &predict, "model"_a, "predictors"_a);

  m.def("r_squared", &r_squared, "predictions"_a, "responses"_a);
  m.def("pesarin_statistic", &pesarin_statistic, "x"_a, "y"_a);
  m.def("spearman_rho", &spearman_rho, "x"_a, "y"_a);
  m.def("kendall_tau", &kendall_tau, "x"_a, "y"_a);

  py::class_<RankTestResult>(m, "RankTestResult")
      .def_readonly("statistic", &RankTestResult::statistic)
      .def_readonly("p_value", &RankTestResult::p_value)
      .def_readonly("reject", &RankTestResult::reject)
      .def_property_readonly("method", [](const RankTestResult& r) { return to_string(r.method); });
  m.def(
      "rank_independence_test",
      [](const Vector& x, const Vector& y, const std::string& method, const TestConfig& config) {
        return rank_independence_test(x, y, rank_named(method), config);
      },
      "x"_a, "y"_a, "method"_a = "spearman", "config"_a = TestConfig{});

  py::class_<TestOutcome>(m, "TestOutcome")
      .def_readonly("statistic_name", &TestOutcome::statistic_name)
      .def_readonly("model_name", &TestOutcome::model_name)
      .def_readonly("r0", &TestOutcome::r0)
      .def_readonly("reference", &TestOutcome::reference)
      .def_readonly("q", &TestOutcome::q)
      .def_readonly("p_value", &TestOutcome::p_value)
      .def_readonly("reject", &TestOutcome::reject)
      .def_readonly("diverged", &TestOutcome::diverged)
      .def_readonly("config", &TestOutcome::config)
      .def("to_json", [](const TestOutcome& o) { return io::outcome_to_json(o).dump(); });

  m.def(
      "run_permutation_test",
      [](const Dataset& data, const RegressorSpec& spec, const std::string& statistic, const TestConfig& config,
         std::size_t threads) {
        py::gil_scoped_release release;
        return run_permutation_test(data, spec, statistic_named(statistic), config, threads);
      },
      "data"_a, "spec"_a = RegressorSpec::ols(), "statistic"_a = "r2", "config"_a = TestConfig{}, "threads"_a = 1);

  m.def(
      "empirical_quantile", [](const std::vector<double>& s, double level) { return empirical_quantile(s, level); },
      "sample"_a, "level"_a);
  m.def(
      "sample_permutations",
      [](std::size_t n, std::size_t count, std::uint64_t seed) {
        return sample_permutations(n, count, RngPolicy(seed)).permutations;
      },
      "n"_a, "count"_a, "seed"_a = 0);

  m.def(
      "generate",
      [](const std::string& scenario, std::size_t n, std::uint64_t seed, std::optional<double> a,
         std::optional<double> rho, std::optional<double> sd2, std::optional<double> noise_sd) {
        ScenarioSpec spec;
        spec.scenario = scenario_from_string(scenario);
        spec.n = n;
        spec.seed = seed;
        spec.params = {a, rho, sd2, noise_sd};
        return generate(spec);
      },
      "scenario"_a, "n"_a = 100, "seed"_a = 0, "a"_a = py::none(), "rho"_a = py::none(), "sd2"_a = py::none(),
      "noise_sd"_a = py::none());

  m.def(
      "fourier_features",
      [](const Vector& samples, int harmonics) { return fourier_features(SeriesRecord{"", "", samples}, harmonics); },
      "samples"_a, "harmonics"_a);
  m.def("va_index", &va_index, "ball_velocity_kph"_a, "achieved_points"_a);
}
