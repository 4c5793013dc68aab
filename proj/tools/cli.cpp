/*
 * Copyright 2026 The menkf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace menkf::cli {

namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw BadArguments("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") {
    return true;
  }
  if (text == "0" || text == "false" || text == "off" || text == "no") {
    return false;
  }
  throw BadArguments("invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

std::vector<std::string_view> split_list(std::string_view list) {
  std::vector<std::string_view> items;
  while (!list.empty()) {
    const auto comma = list.find(',');
    items.push_back(trim(list.substr(0, comma)));
    if (comma == std::string_view::npos) {
      break;
    }
    list.remove_prefix(comma + 1);
  }
  return items;
}

/// Options shared by every subcommand. Values land here first and are
/// applied on top of the config file only when given on the command line.
struct Flags {
  Index d = 0;
  Index m = 0;
  Index n_ens = 0;
  double sigma = 0.0;
  double ell = 0.0;
  double tau = 0.0;
  std::uint64_t seed = 0;
  int runs = 0;
  std::string methods;
  std::string out_dir = ".";
  std::string config;
  bool perturb_obs = false;
  double loc_radius = 0.0;
  Index draws = 0;
  std::string values;
  int instances = 100;
  Index samples = 200000;

  std::vector<std::pair<std::string, CLI::Option*>> given;

  bool has(const std::string& name) const {
    for (const auto& [n, opt] : given) {
      if (n == name && opt->count() > 0) {
        return true;
      }
    }
    return false;
  }
};

void add_common_options(CLI::App& sub, Flags& f) {
  auto add = [&](const std::string& name, auto& target, const std::string& help) {
    f.given.emplace_back(name, sub.add_option("--" + name, target, help));
  };
  add("d", f.d, "grid size");
  add("m", f.m, "number of observations (default d/5)");
  add("n-ens", f.n_ens, "ensemble size");
  add("sigma", f.sigma, "prior standard deviation");
  add("ell", f.ell, "kernel length-scale");
  add("tau", f.tau, "observation noise standard deviation");
  add("seed", f.seed, "root random seed (fallback: $MATHERON_ENKF_SEED)");
  add("runs", f.runs, "timed repetitions, odd");
  add("methods", f.methods, "comma list of gp,enkf,letkf");
  add("out-dir", f.out_dir, "output directory, created if absent");
  add("config", f.config, "flat key=value config file");
  add("loc-radius", f.loc_radius, "LETKF taper half-width (default 2*ell)");
  add("draws", f.draws, "posterior draws per method");
  f.given.emplace_back("perturb-obs",
                       sub.add_flag("--perturb-obs", f.perturb_obs, "perturb EnKF observations"));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw BadArguments("cannot read config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// defaults < config file < environment seed (only if no seed yet) < flags
ExperimentConfig resolve_config(const Flags& f, ExperimentConfig cfg) {
  bool seed_from_file = false;
  if (f.has("config")) {
    const std::vector<std::string> keys = apply_config_text(read_file(f.config), cfg);
    seed_from_file = std::find(keys.begin(), keys.end(), "seed") != keys.end();
  }
  if (!f.has("seed") && !seed_from_file) {
    if (const char* env = std::getenv(std::string(kSeedEnvVar).c_str()); env != nullptr) {
      cfg.seed = parse_number<std::uint64_t>(kSeedEnvVar, trim(env));
    }
  }
  if (f.has("d")) cfg.d = f.d;
  if (f.has("m")) cfg.m = f.m;
  if (f.has("n-ens")) cfg.n_ens = f.n_ens;
  if (f.has("sigma")) cfg.sigma = f.sigma;
  if (f.has("ell")) cfg.ell = f.ell;
  if (f.has("tau")) cfg.tau = f.tau;
  if (f.has("seed")) cfg.seed = f.seed;
  if (f.has("runs")) cfg.runs = f.runs;
  if (f.has("methods")) cfg.methods = parse_methods(f.methods);
  if (f.has("loc-radius")) cfg.loc_radius = f.loc_radius;
  if (f.has("draws")) cfg.draws = f.draws;
  if (f.has("perturb-obs")) cfg.perturb_obs = f.perturb_obs;
  try {
    cfg.check();
  } catch (const ContractViolation& e) {
    throw BadArguments(e.what());
  }
  return cfg;
}

fs::path prepare_out_dir(const Flags& f) {
  fs::path dir(f.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw BadArguments("cannot create output directory '" + f.out_dir + "': " + ec.message());
  }
  return dir;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw BadArguments("cannot write '" + path.string() + "'");
  }
  return os;
}

int run_demo(const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f, ExperimentConfig{});
  const fs::path dir = prepare_out_dir(f);
  const Instance instance = make_instance(cfg);
  std::vector<std::pair<Method, MethodResult>> results;
  for (const Method method : cfg.methods) {
    results.emplace_back(method, run_method(method, instance, cfg));
    const TimingRecord& t = results.back().second.timing;
    out << to_string(method) << ": rmse " << format_double(t.rmse) << ", fit "
        << format_double(t.fit_time_s) << " s, predict " << format_double(t.predict_time_s)
        << " s\n";
  }
  out << "prior-mean rmse " << format_double(rmse(Vector::Zero(cfg.d), instance.problem.truth))
      << "\n";
  const fs::path path = dir / "posterior_samples.csv";
  std::ofstream os = open_csv(path);
  write_posterior_csv(os, instance.problem, results);
  out << "wrote " << path.string() << "\n";
  return kSuccess;
}

int run_sweep(const Flags& f, SweepAxis axis, std::ostream& out) {
  ExperimentConfig base;
  base.n_ens = kSweepEnsembleSize;
  if (axis == SweepAxis::observations) {
    base.d = 800;
  } else {
    base.m = 40;
  }
  ExperimentConfig cfg = resolve_config(f, base);
  const std::vector<Index> values =
      f.values.empty() ? default_sweep_values(axis) : parse_values(f.values);
  for (const Index v : values) {
    ExperimentConfig point = cfg;
    (axis == SweepAxis::observations ? point.m : point.d) = v;
    try {
      point.check();
    } catch (const ContractViolation& e) {
      throw BadArguments(std::string("sweep value ") + std::to_string(v) + ": " + e.what());
    }
  }
  const fs::path dir = prepare_out_dir(f);
  const fs::path path = dir / (axis == SweepAxis::observations ? "timing_vs_observations.csv"
                                                                 : "timing_vs_dimensions.csv");
  std::ofstream os = open_csv(path);
  os << kTimingHeader << '\n' << std::flush;
  sweep(axis, values, cfg, [&](const TimingRecord& r) {
    write_timing_row(os, r);
    os.flush();
    out << to_string(r.method) << " " << to_string(axis) << "=" << r.axis_value << ": fit "
        << format_double(r.fit_time_s) << " s, predict " << format_double(r.predict_time_s)
        << " s, rmse " << format_double(r.rmse) << std::endl;
  });
  out << "wrote " << path.string() << "\n";
  return kSuccess;
}

int run_equivalence(const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f, ExperimentConfig{});
  if (f.instances < 1) {
    throw BadArguments("--instances must be >= 1");
  }
  const EquivalenceSummary summary = equivalence_suite(cfg.seed, f.instances);
  constexpr double kTolerance = 1e-9;
  out << "instances " << summary.differences.size() << "\n";
  out << "max relative difference " << format_double(summary.max_difference) << "\n";
  const bool ok = summary.max_difference <= kTolerance;
  out << (ok ? "PASS" : "FAIL") << " (tolerance " << format_double(kTolerance) << ")\n";
  return ok ? kSuccess : kCheckFailed;
}

int run_moments_check(const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f, ExperimentConfig{});
  if (f.samples < 2) {
    throw BadArguments("--samples must be >= 2");
  }
  const MomentCheck check = matheron_moment_check(cfg.seed, f.samples);
  out << "draws " << check.draws << "\n";
  for (Index i = 0; i < check.mean_z.size(); ++i) {
    out << "mean[" << i << "] exact " << format_double(check.exact_mean(i)) << " empirical "
        << format_double(check.empirical_mean(i)) << " z " << format_double(check.mean_z(i))
        << "\n";
  }
  out << "covariance frobenius-relative error " << format_double(check.cov_relative_error)
      << "\n";
  const bool ok = check.passed();
  out << (ok ? "PASS" : "FAIL") << " (mean within 4 standard errors, covariance within 5%)\n";
  return ok ? kSuccess : kCheckFailed;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) {
    return "nan";
  }
  return std::string(buf.data(), ptr);
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> methods;
  for (const auto item : split_list(list)) {
    const auto method = parse_method(item);
    if (!method) {
      throw BadArguments("unknown method '" + std::string(item) + "'");
    }
    if (std::find(methods.begin(), methods.end(), *method) == methods.end()) {
      methods.push_back(*method);
    }
  }
  if (methods.empty()) {
    throw BadArguments("no methods given");
  }
  return methods;
}

std::vector<Index> parse_values(std::string_view list) {
  std::vector<Index> values;
  for (const auto item : split_list(list)) {
    values.push_back(parse_number<Index>("sweep values", item));
  }
  if (values.empty()) {
    throw BadArguments("no sweep values given");
  }
  if (!std::is_sorted(values.begin(), values.end())) {
    throw BadArguments("sweep values must be ascending");
  }
  return values;
}

std::vector<std::string> apply_config_text(std::string_view text, ExperimentConfig& cfg) {
  std::vector<std::string> keys;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw BadArguments("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "d") {
      cfg.d = parse_number<Index>(key, value);
    } else if (key == "m") {
      cfg.m = parse_number<Index>(key, value);
    } else if (key == "N" || key == "n_ens") {
      cfg.n_ens = parse_number<Index>(key, value);
    } else if (key == "sigma") {
      cfg.sigma = parse_number<double>(key, value);
    } else if (key == "ell") {
      cfg.ell = parse_number<double>(key, value);
    } else if (key == "tau") {
      cfg.tau = parse_number<double>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "runs") {
      cfg.runs = parse_number<int>(key, value);
    } else if (key == "methods") {
      cfg.methods = parse_methods(value);
    } else if (key == "perturb_obs") {
      cfg.perturb_obs = parse_bool(key, value);
    } else if (key == "loc_radius") {
      cfg.loc_radius = parse_number<double>(key, value);
    } else if (key == "draws") {
      cfg.draws = parse_number<Index>(key, value);
    } else if (key == "sites") {
      if (value == "even") {
        cfg.sites = SiteLayout::even;
      } else if (value == "random") {
        cfg.sites = SiteLayout::random;
      } else {
        throw BadArguments("sites must be 'even' or 'random'");
      }
    } else {
      throw BadArguments("config line " + std::to_string(line_no) + ": unknown key '" +
                         std::string(key) + "'");
    }
    keys.emplace_back(key);
  }
  return keys;
}

void write_posterior_csv(std::ostream& os, const KrigingProblem& problem,
                         const std::vector<std::pair<Method, MethodResult>>& results) {
  const Index d = problem.dim();
  std::vector<std::optional<double>> observed(static_cast<std::size_t>(d));
  for (Index j = 0; j < problem.num_obs(); ++j) {
    observed[static_cast<std::size_t>(problem.grid.obs_indices[static_cast<std::size_t>(j)])] =
        problem.y_star(j);
  }
  os << kPosteriorHeader << '\n';
  for (const auto& [method, result] : results) {
    const std::string_view name = to_string(method);
    for (Index i = 0; i < d; ++i) {
      const auto& obs = observed[static_cast<std::size_t>(i)];
      std::ostringstream prefix;
      prefix << name << ',' << i << ',' << format_double(problem.grid.positions[i]) << ','
             << format_double(problem.truth(i)) << ',' << (obs ? 1 : 0) << ','
             << (obs ? format_double(*obs) : std::string()) << ','
             << format_double(result.mean(i)) << ',' << format_double(result.std(i)) << ',';
      const std::string row = prefix.str();
      os << row << "-1,\n";
      for (Index k = 0; k < result.draws.cols(); ++k) {
        os << row << k << ',' << format_double(result.draws(i, k)) << '\n';
      }
    }
  }
}

void write_timing_row(std::ostream& os, const TimingRecord& r) {
  os << to_string(r.method) << ',' << to_string(r.axis) << ',' << r.axis_value << ','
     << format_double(r.fit_time_s) << ',' << format_double(r.predict_time_s) << ','
     << format_double(r.rmse) << ',' << r.runs << ',' << r.seed << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact Gaussian conditioning, pathwise Matheron updates and ensemble Kalman "
               "analyses on a 1D kriging benchmark",
               "matheron-enkf"};
  app.require_subcommand(1);

  Flags flags;
  auto* demo = app.add_subcommand("demo", "posterior mean/std/draws for each method");
  auto* sweep_obs = app.add_subcommand("sweep-obs", "timing sweep over the number of observations");
  auto* sweep_dim = app.add_subcommand("sweep-dim", "timing sweep over the grid size");
  auto* equivalence = app.add_subcommand("equivalence", "EnKF vs empirical Matheron on random instances");
  auto* moments = app.add_subcommand("moments-check", "Monte Carlo moment test of the pathwise update");
  for (auto* sub : {demo, sweep_obs, sweep_dim, equivalence, moments}) {
    add_common_options(*sub, flags);
  }
  for (auto* sub : {sweep_obs, sweep_dim}) {
    sub->add_option("--values", flags.values, "ascending comma list of sweep values");
  }
  equivalence->add_option("--instances", flags.instances, "number of random instances");
  moments->add_option("--samples", flags.samples, "number of pathwise draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kSuccess;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kBadArguments;
  }

  try {
    if (demo->parsed()) {
      return run_demo(flags, out);
    }
    if (sweep_obs->parsed()) {
      return run_sweep(flags, SweepAxis::observations, out);
    }
    if (sweep_dim->parsed()) {
      return run_sweep(flags, SweepAxis::dimensions, out);
    }
    if (equivalence->parsed()) {
      return run_equivalence(flags, out);
    }
    if (moments->parsed()) {
      return run_moments_check(flags, out);
    }
  } catch (const BadArguments& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
  err << app.help();
  return kBadArguments;
}

}  // namespace menkf::cli
