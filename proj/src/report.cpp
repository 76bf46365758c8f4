#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "permtest/io.hpp"

namespace permtest::io {

Json config_to_json(const TestConfig& config) {
  return Json{{"alpha", config.alpha},
              {"n_permutations", config.n_permutations},
              {"master_seed", config.master_seed},
              {"exhaustive", config.exhaustive}};
}

TestConfig config_from_json(const Json& j) {
  TestConfig c;
  c.alpha = j.at("alpha").get<double>();
  c.n_permutations = j.at("n_permutations").get<std::size_t>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.exhaustive = j.at("exhaustive").get<bool>();
  return c;
}

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

Json outcome_to_json(const TestOutcome& outcome) {
  Json reference = Json::array();
  for (double v : outcome.reference) reference.push_back(number_or_null(v));
  return Json{{"statistic", outcome.statistic_name},
              {"model", outcome.model_name},
              {"r0", number_or_null(outcome.r0)},
              {"q", number_or_null(outcome.q)},
              {"p_value", outcome.p_value},
              {"reject", outcome.reject},
              {"diverged", outcome.diverged},
              {"config", config_to_json(outcome.config)},
              {"reference", std::move(reference)}};
}

TestOutcome outcome_from_json(const Json& j) {
  try {
    TestOutcome o;
    o.statistic_name = j.at("statistic").get<std::string>();
    o.model_name = j.at("model").get<std::string>();
    o.r0 = number_from(j.at("r0"));
    o.q = number_from(j.at("q"));
    o.p_value = j.at("p_value").get<double>();
    o.reject = j.at("reject").get<bool>();
    o.diverged = j.at("diverged").get<std::size_t>();
    o.config = config_from_json(j.at("config"));
    for (const auto& v : j.at("reference")) o.reference.push_back(number_from(v));
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed outcome JSON: ") + e.what());
  }
}

Json sweep_to_json(const SweepResult& result) {
  Json outcomes = Json::array();
  for (const auto& point : result.outcomes) {
    Json row = Json::array();
    for (bool b : point) row.push_back(b);
    outcomes.push_back(std::move(row));
  }
  return Json{{"label", result.label},
              {"scenario", result.scenario},
              {"parameter", result.parameter},
              {"replications", result.replications},
              {"config", config_to_json(result.config)},
              {"grid", result.grid},
              {"rejection_rate", result.rejection_rate},
              {"outcomes", std::move(outcomes)}};
}

SweepResult sweep_from_json(const Json& j) {
  try {
    SweepResult r;
    r.label = j.at("label").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    r.parameter = j.at("parameter").get<std::string>();
    r.replications = j.at("replications").get<std::size_t>();
    r.config = config_from_json(j.at("config"));
    r.grid = j.at("grid").get<std::vector<double>>();
    r.rejection_rate = j.at("rejection_rate").get<std::vector<double>>();
    for (const auto& row : j.at("outcomes")) r.outcomes.push_back(row.get<std::vector<bool>>());
    if (r.grid.size() != r.rejection_rate.size() || r.grid.size() != r.outcomes.size()) {
      throw Error(ErrorKind::ParseError, "sweep JSON has inconsistent lengths");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed sweep JSON: ") + e.what());
  }
}

void write_sweep_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path) {
  const bool labelled = results.size() > 1;
  std::string out = labelled ? "method,grid_value,rejection_rate,R\n" : "grid_value,rejection_rate,R\n";
  for (const auto& r : results) {
    for (std::size_t g = 0; g < r.grid.size(); ++g) {
      if (labelled) out += r.label + ",";
      out += format_double(r.grid[g]) + "," + format_double(r.rejection_rate[g]) + "," +
             std::to_string(r.replications) + "\n";
    }
  }
  write_text(path, out);
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

}  // namespace

std::string render_svg(const TestOutcome& outcome, std::size_t bins) {
  constexpr double width = 720, height = 420;
  constexpr double left = 60, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::vector<double> finite;
  for (double v : outcome.reference) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : finite) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : {outcome.r0, outcome.q}) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.02 * (hi - lo);
  lo -= pad;
  hi += pad;

  std::vector<std::size_t> counts(bins, 0);
  for (double v : finite) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)]++;
  }
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end()));
  auto sx = [&](double v) { return left + (v - lo) / (hi - lo) * plot_w; };

  std::ostringstream svg;
  svg << R"(<?xml version="1.0" encoding="UTF-8"?>)" << "\n"
      << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << width << R"(" height=")" << height
      << R"(" viewBox="0 0 )" << width << ' ' << height << R"(">)" << "\n";
  svg << R"(<rect x="0" y="0" width=")" << width << R"(" height=")" << height << R"(" fill="white"/>)" << "\n";
  svg << R"(<text x=")" << width / 2 << R"(" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">)"
      << xml_escape("Permutation distribution of " + outcome.statistic_name + " (" + outcome.model_name + ", B = " +
                    std::to_string(outcome.reference.size()) + ")")
      << "</text>\n";

  svg << R"(<g class="bars" fill="#8fa8c8" stroke="#4a6484" stroke-width="0.5">)" << "\n";
  const double bin_w = plot_w / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double h = plot_h * static_cast<double>(counts[b]) / static_cast<double>(peak);
    svg << R"(<rect class="bar" x=")" << fixed(left + bin_w * static_cast<double>(b)) << R"(" y=")"
        << fixed(top + plot_h - h) << R"(" width=")" << fixed(bin_w) << R"(" height=")" << fixed(h) << R"("/>)"
        << "\n";
  }
  svg << "</g>\n";

  svg << R"(<line class="axis" x1=")" << left << R"(" y1=")" << top + plot_h << R"(" x2=")" << left + plot_w
      << R"(" y2=")" << top + plot_h << R"(" stroke="black"/>)" << "\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    svg << R"(<text class="tick" x=")" << fixed(sx(v)) << R"(" y=")" << top + plot_h + 18
        << R"(" text-anchor="middle" font-family="sans-serif" font-size="11">)" << fixed(v, 3) << "</text>\n";
  }
  svg << R"(<text x=")" << left - 40 << R"(" y=")" << top + plot_h / 2
      << R"(" font-family="sans-serif" font-size="12" transform="rotate(-90 )" << left - 40 << ' '
      << top + plot_h / 2 << R"x()">count (max )x" << peak << ")</text>\n";

  auto marker = [&](const char* kind, const char* colour, double v, const std::string& label, double label_y) {
    if (!std::isfinite(v)) return;
    const double x = sx(v);
    svg << R"(<line class="marker )" << kind << R"(" x1=")" << fixed(x) << R"(" y1=")" << top << R"(" x2=")"
        << fixed(x) << R"(" y2=")" << top + plot_h << R"(" stroke=")" << colour << R"(" stroke-width="2"/>)" << "\n";
    svg << R"(<text class="label" x=")" << fixed(x + 4) << R"(" y=")" << label_y << R"(" fill=")" << colour
        << R"(" font-family="sans-serif" font-size="12">)" << xml_escape(label) << "</text>\n";
  };
  marker("observed", "red", outcome.r0, "observed " + format_double(outcome.r0), top + 14);
  marker("quantile", "green", outcome.q,
         format_double(100.0 * (1.0 - outcome.config.alpha)) + "% quantile " + format_double(outcome.q), top + 30);
  svg << "</svg>\n";
  return svg.str();
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "svg") return ReportFormat::Svg;
  throw Error(ErrorKind::InvalidConfig, "unknown report format '" + name + "'");
}

void emit_report(const TestOutcome& outcome, ReportFormat format, const std::filesystem::path& path,
                 const Json* manifest) {
  switch (format) {
    case ReportFormat::Json: {
      Json j = outcome_to_json(outcome);
      if (manifest) j["manifest"] = *manifest;
      write_text(path, j.dump(2) + "\n");
      break;
    }
    case ReportFormat::Csv: {
      std::string out = "reference\n";
      for (double v : outcome.reference) out += format_double(v) + "\n";
      write_text(path, out);
      break;
    }
    case ReportFormat::Svg: write_text(path, render_svg(outcome)); break;
  }
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  const std::string data = read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "SHA-256 failed for " + path.string());
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::vector<std::string> strip_threads(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--threads") {
      ++i;
      continue;
    }
    if (args[i].rfind("--threads=", 0) == 0) continue;
    out.push_back(args[i]);
  }
  return out;
}

Json RunManifest::reproducible_json() const {
  Json inputs_json = Json::array();
  for (const auto& in : inputs) inputs_json.push_back(Json{{"path", in.path}, {"sha256", in.sha256}});
  return Json{{"tool_version", tool_version},
              {"command", strip_threads(command)},
              {"master_seed", master_seed},
              {"config", config},
              {"inputs", std::move(inputs_json)}};
}

Json RunManifest::to_json() const {
  Json j = reproducible_json();
  j["argv"] = command;
  j["threads"] = threads;
  j["wall_seconds"] = wall_seconds;
  return j;
}

RunManifest RunManifest::from_json(const Json& j) {
  try {
    RunManifest m;
    m.command = j.contains("argv") ? j.at("argv").get<std::vector<std::string>>()
                                   : j.at("command").get<std::vector<std::string>>();
    m.config = j.value("config", Json::object());
    for (const auto& in : j.at("inputs")) m.inputs.push_back({in.at("path"), in.at("sha256")});
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.threads = j.value("threads", std::size_t{1});
    m.wall_seconds = j.value("wall_seconds", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace permtest::io
