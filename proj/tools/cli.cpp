#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "permtest/engine.hpp"
#include "permtest/features.hpp"
#include "permtest/io.hpp"
#include "permtest/simstudy.hpp"

#ifndef PERMTEST_VERSION
#define PERMTEST_VERSION "0.0.0"
#endif

namespace permtest::cli {

namespace {

struct ModelOptions {
  std::string model = "ols";
  std::string layers = "30,30,30";
  std::size_t epochs = 500;
  double learning_rate = 0.01;
};

struct ConfigOptions {
  double alpha = 0.05;
  std::size_t permutations = 200;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  std::size_t threads = 1;
};

struct ScenarioOptions {
  std::string scenario = "null_uniform";
  std::size_t n = 100;
  std::optional<double> a, rho, sd2, noise_sd;
};

void add_model_options(CLI::App& app, ModelOptions& m) {
  app.add_option("--model", m.model, "Model class")->check(CLI::IsMember({"ols", "mlp"}))->capture_default_str();
  app.add_option("--mlp-layers", m.layers, "Comma-separated hidden layer widths")->capture_default_str();
  app.add_option("--mlp-epochs", m.epochs, "Gradient descent steps")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--mlp-lr", m.learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_config_options(CLI::App& app, ConfigOptions& c) {
  app.add_option("--alpha", c.alpha, "Significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--permutations,-B", c.permutations, "Number of sampled permutations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (does not change results)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_scenario_options(CLI::App& app, ScenarioOptions& s) {
  app.add_option("--scenario", s.scenario, "Scenario name")->capture_default_str();
  app.add_option("--n", s.n, "Sample size")->capture_default_str();
  app.add_option("--a", s.a, "Mean shift of X1 (log_quad_mean_sweep)");
  app.add_option("--rho", s.rho, "Correlation (bivariate_normal)");
  app.add_option("--sd2", s.sd2, "Standard deviation of X2 (log_quad_mean_sweep)");
  app.add_option("--noise-sd", s.noise_sd, "Standard deviation of the noise term");
}

std::vector<std::size_t> parse_layers(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = io::parse_number(item, 0, "--mlp-layers");
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw Error(ErrorKind::InvalidConfig, "layer widths must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Error(ErrorKind::InvalidConfig, "no hidden layers given");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(io::parse_number(item, 0, "--grid"));
  return out;
}

RegressorSpec make_spec(const ModelOptions& m) {
  if (m.model == "ols") return RegressorSpec::ols();
  return RegressorSpec::mlp(parse_layers(m.layers), m.epochs, m.learning_rate);
}

GofStatistic make_statistic(const std::string& name) {
  if (name == "r2") return GofStatistic::r_squared();
  if (name == "tstar") return GofStatistic::pesarin();
  if (name == "abs-risk") return GofStatistic::absolute_risk();
  throw Error(ErrorKind::InvalidConfig, "unknown statistic '" + name + "'");
}

TestConfig make_config(const ConfigOptions& c) {
  return TestConfig{c.alpha, c.permutations, c.seed, c.exhaustive};
}

ScenarioSpec make_scenario(const ScenarioOptions& s) {
  ScenarioSpec spec;
  spec.scenario = scenario_from_string(s.scenario);
  spec.n = s.n;
  spec.params = {s.a, s.rho, s.sd2, s.noise_sd};
  return spec;
}

// "r2:ols", "abs-risk:mlp", "tstar", "spearman:1", "kendall:2".
TestMethod parse_method(const std::string& text, const ModelOptions& model) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "spearman" || head == "kendall") {
    const double col = tail.empty() ? 1.0 : io::parse_number(tail, 0, "--method");
    if (col < 1 || col != static_cast<double>(static_cast<std::size_t>(col))) {
      throw Error(ErrorKind::InvalidConfig, "rank test column must be a positive integer");
    }
    return TestMethod::rank_test(head == "spearman" ? RankMethod::Spearman : RankMethod::Kendall,
                                 static_cast<std::size_t>(col) - 1);
  }
  ModelOptions m = model;
  if (!tail.empty()) m.model = tail;
  if (m.model != "ols" && m.model != "mlp") throw Error(ErrorKind::InvalidConfig, "unknown model '" + m.model + "'");
  return TestMethod::permutation(make_spec(m), make_statistic(head));
}

io::RunManifest start_manifest(const std::vector<std::string>& args, const TestConfig& config, std::size_t threads) {
  io::RunManifest manifest;
  manifest.command = args;
  manifest.config = io::config_to_json(config);
  manifest.master_seed = config.master_seed;
  manifest.tool_version = PERMTEST_VERSION;
  manifest.threads = threads;
  return manifest;
}

void add_input(io::RunManifest& manifest, const std::string& path) {
  manifest.inputs.push_back({path, io::sha256_file(path)});
}

void write_manifest_sidecar(const io::RunManifest& manifest, const std::string& out_path) {
  io::write_text(out_path + ".manifest.json", manifest.to_json().dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Permutation test of whether a regression model fits more than noise", "permtest"};
  app.set_version_flag("--version", PERMTEST_VERSION);
  app.require_subcommand(1);

  // test
  auto* test = app.add_subcommand("test", "Run the permutation test on a CSV dataset");
  std::string data_path, response = "y", statistic = "r2", out_path, csv_path, svg_path, series_path;
  std::string id_column = "obs_id";
  int fourier_k = 0;
  ModelOptions model;
  ConfigOptions cfg;
  test->add_option("--data", data_path, "CSV with header; all non-response columns are predictors")->required();
  test->add_option("--response", response, "Response column")->capture_default_str();
  test->add_option("--statistic", statistic, "Goodness-of-fit statistic")
      ->check(CLI::IsMember({"r2", "tstar", "abs-risk"}))
      ->capture_default_str();
  add_model_options(*test, model);
  add_config_options(*test, cfg);
  test->add_flag("--exhaustive", cfg.exhaustive, "Enumerate all n! permutations (n <= 8)");
  test->add_option("--series", series_path, "Long-format series CSV (obs_id,channel,t_index,value)");
  test->add_option("--fourier-k", fourier_k, "Harmonics per channel for --series")->check(CLI::PositiveNumber);
  test->add_option("--id-column", id_column, "Observation id column in --data for --series")->capture_default_str();
  test->add_option("--out", out_path, "Outcome JSON path")->required();
  test->add_option("--csv", csv_path, "Reference sample CSV path");
  test->add_option("--svg", svg_path, "Histogram SVG path");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Rejection-rate study over a scenario parameter grid");
  ScenarioOptions scen;
  std::string parameter = "rho", grid_text, sweep_out, sweep_csv;
  std::size_t steps = 11, replications = 100;
  std::vector<std::string> methods;
  ModelOptions sweep_model;
  ConfigOptions sweep_cfg;
  std::string sweep_statistic = "r2";
  add_scenario_options(*sweep, scen);
  add_model_options(*sweep, sweep_model);
  add_config_options(*sweep, sweep_cfg);
  sweep->add_option("--param", parameter, "Swept parameter: a, rho, sd2, noise_sd or n")->capture_default_str();
  sweep->add_option("--grid", grid_text, "Comma-separated grid values (overrides --steps)");
  sweep->add_option("--steps", steps, "Points on the default grid")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--replications,-R", replications, "Datasets per grid point")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--statistic", sweep_statistic, "Statistic when no --method is given")
      ->check(CLI::IsMember({"r2", "tstar", "abs-risk"}))
      ->capture_default_str();
  sweep->add_option("--method", methods,
                    "Competing test, repeatable: r2:ols, r2:mlp, abs-risk:ols, tstar, spearman:<col>, kendall:<col>");
  sweep->add_option("--out", sweep_out, "Sweep JSON path")->required();
  sweep->add_option("--csv", sweep_csv, "Sweep CSV path");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset as CSV");
  ScenarioOptions sim;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  add_scenario_options(*simulate, sim);
  simulate->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "CSV path")->required();

  // report
  auto* report = app.add_subcommand("report", "Re-render a saved outcome JSON");
  std::string report_in, report_format = "svg", report_out;
  report->add_option("--in", report_in, "Outcome JSON written by `test`")->required();
  report->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "svg"}))
      ->capture_default_str();
  report->add_option("--out", report_out, "Output path")->required();

  // replay
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  std::string manifest_path;
  replay->add_option("manifest", manifest_path, "Manifest JSON (the .manifest.json sidecar or a result file)")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << PERMTEST_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (e.get_exit_code() != 0) return 1;
    return 0;
  }
  const auto start = std::chrono::steady_clock::now();

  if (test->parsed()) {
    const TestConfig config = make_config(cfg);
    const RegressorSpec spec = make_spec(model);
    const GofStatistic stat = make_statistic(statistic);
    io::RunManifest manifest = start_manifest(args, config, cfg.threads);
    add_input(manifest, data_path);

    std::optional<Dataset> data;
    if (!series_path.empty()) {
      if (fourier_k < 1) throw Error(ErrorKind::InvalidConfig, "--series requires --fourier-k");
      add_input(manifest, series_path);
      std::vector<std::string> ids;
      Matrix features = featurize(io::read_series_csv(series_path), fourier_k, &ids);
      Vector y = io::responses_by_id(io::read_csv(data_path), id_column, response, ids);
      data = validate_dataset(std::move(features), std::move(y));
    } else {
      data = io::ingest_csv(data_path, response);
    }

    const TestOutcome outcome = run_permutation_test(*data, spec, stat, config, cfg.threads);
    manifest.wall_seconds = seconds_since(start);
    const io::Json reproducible = manifest.reproducible_json();
    io::emit_report(outcome, io::ReportFormat::Json, out_path, &reproducible);
    write_manifest_sidecar(manifest, out_path);
    if (!csv_path.empty()) io::emit_report(outcome, io::ReportFormat::Csv, csv_path);
    if (!svg_path.empty()) io::emit_report(outcome, io::ReportFormat::Svg, svg_path);

    out << outcome.statistic_name << " (" << outcome.model_name << "): r0=" << io::format_double(outcome.r0)
        << " q=" << io::format_double(outcome.q) << " p=" << io::format_double(outcome.p_value)
        << (outcome.reject ? " reject H0" : " do not reject H0") << "\n";
    if (outcome.diverged) out << "warning: " << outcome.diverged << " permuted fits diverged\n";
    return 0;
  }

  if (sweep->parsed()) {
    const TestConfig config = make_config(sweep_cfg);
    SweepDesign design;
    design.base = make_scenario(scen);
    design.parameter = sweep_parameter_from_string(parameter);
    design.grid = grid_text.empty() ? default_grid(design.parameter, steps) : parse_grid(grid_text);

    std::vector<TestMethod> competitors;
    if (methods.empty()) {
      competitors.push_back(TestMethod::permutation(make_spec(sweep_model), make_statistic(sweep_statistic)));
    }
    for (const auto& m : methods) competitors.push_back(parse_method(m, sweep_model));

    io::RunManifest manifest = start_manifest(args, config, sweep_cfg.threads);
    const auto results = compare_tests(design, competitors, config, replications, sweep_cfg.threads);
    manifest.wall_seconds = seconds_since(start);

    io::Json doc{{"results", io::Json::array()}};
    for (const auto& r : results) doc["results"].push_back(io::sweep_to_json(r));
    doc["manifest"] = manifest.reproducible_json();
    io::write_text(sweep_out, doc.dump(2) + "\n");
    write_manifest_sidecar(manifest, sweep_out);
    if (!sweep_csv.empty()) io::write_sweep_csv(results, sweep_csv);

    for (const auto& r : results) {
      out << r.label << ":";
      for (std::size_t g = 0; g < r.grid.size(); ++g) {
        out << " " << r.parameter << "=" << io::format_double(r.grid[g]) << "->" << io::format_double(r.rejection_rate[g]);
      }
      out << "\n";
    }
    return 0;
  }

  if (simulate->parsed()) {
    ScenarioSpec spec = make_scenario(sim);
    spec.seed = sim_seed;
    io::write_dataset_csv(generate(spec), sim_out);
    out << "wrote " << spec.n << " rows of " << to_string(spec.scenario) << " to " << sim_out << "\n";
    return 0;
  }

  if (report->parsed()) {
    const io::Json j = io::read_json(report_in);
    const TestOutcome outcome = io::outcome_from_json(j);
    const io::Json* manifest = j.contains("manifest") ? &j.at("manifest") : nullptr;
    io::emit_report(outcome, io::report_format_from_string(report_format), report_out, manifest);
    return 0;
  }

  if (replay->parsed()) {
    if (depth > 0) throw Error(ErrorKind::InvalidConfig, "a manifest cannot replay another replay");
    io::Json j = io::read_json(manifest_path);
    if (j.contains("manifest")) j = j.at("manifest");
    const io::RunManifest manifest = io::RunManifest::from_json(j);
    for (const auto& input : manifest.inputs) {
      if (io::sha256_file(input.path) != input.sha256) {
        err << "warning: " << input.path << " changed since the recorded run\n";
      }
    }
    return dispatch(manifest.command, out, err, depth + 1);
  }
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, 0);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace permtest::cli
