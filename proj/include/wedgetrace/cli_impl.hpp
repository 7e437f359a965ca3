// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wedgetrace/artifacts.hpp"
#include "wedgetrace/checks.hpp"
#include "wedgetrace/io.hpp"

namespace wedgetrace::cli {

namespace detail {

// Flags shared by the computing subcommands. Zero means "not given" for the
// integer options, so config values and defaults can fill in behind them.
struct CommonOpts {
  std::string config;
  std::string fixture;
  std::string strip;
  std::string out = ".";
  int grid = 0;
  int nodes = 0;
  int threads = 0;
};

inline void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--fixture", o.fixture, "fixture name from the registry");
  cmd->add_option("--grid", o.grid, "edge circle grid size");
  cmd->add_option("--nodes", o.nodes, "contour node count");
  cmd->add_option("--strip", o.strip, "strip as gamma,order");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker thread count");
}

inline int env_threads() {
  if (const char* env = std::getenv("WEDGETRACE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

inline Strip parse_strip_flag(const std::string& text) {
  double gamma = 0.0, order = 0.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf%c", &gamma, &order, &tail) != 2 ||
      !(order > 0.0))
    throw ConfigError("--strip expects gamma,order with a positive order");
  return Strip{gamma, order};
}

// Load and key-validate the config document for one command. Validation
// happens before any computation or output, so a malformed file never leaves
// partial artifacts behind.
inline ojson load_config(const CommonOpts& o,
                         std::initializer_list<const char*> allowed) {
  if (o.config.empty()) return ojson::object();
  const ojson j = load_json_file(o.config);
  wedgetrace::detail::require_keys(j, "config", allowed);
  return j;
}

// Flag > config > environment for threads; everything lands in RunConfig so
// the modules see one consistent worker count.
inline RunConfig resolve_run(const CommonOpts& o, const ojson& cfg) {
  RunConfig run;
  if (cfg.contains("tolerances")) apply_tolerances(cfg.at("tolerances"), run);
  if (o.nodes > 0) run.contour_nodes = o.nodes;
  if (o.threads > 0)
    run.threads = o.threads;
  else if (cfg.contains("threads"))
    run.threads = wedgetrace::detail::int_at(cfg, "threads", "config");
  else
    run.threads = env_threads();
  if (run.threads < 1) throw ConfigError("thread count must be at least one");
  run.out_dir = o.out;
  return run;
}

inline int resolve_grid(const CommonOpts& o, const ojson& cfg, int fallback) {
  if (o.grid > 0) return o.grid;
  if (cfg.contains("grid"))
    return wedgetrace::detail::int_at(cfg, "grid", "config");
  return fallback;
}

inline FamilyBundle resolve_family(const CommonOpts& o, const ojson& cfg,
                                   const RunConfig& run) {
  std::string name = o.fixture;
  if (name.empty() && cfg.contains("fixture")) {
    if (!cfg.at("fixture").is_string())
      throw ConfigError("config \"fixture\" must be a string");
    name = cfg.at("fixture").get<std::string>();
  }
  FamilyBundle fb;
  if (!name.empty()) {
    fb = family_for_fixture(name);
  } else if (cfg.contains("operator")) {
    const WedgeOperatorSpec spec = operator_from_json(cfg.at("operator"));
    fb.label = "operator";
    fb.family = indicial_family(spec, spec.fiber);
    fb.m = spec.m;
    fb.strip = Strip{spec.gamma, static_cast<double>(spec.m)};
  } else {
    throw ConfigError(
        "specify --fixture or a config with \"fixture\" or \"operator\"");
  }
  if (!o.strip.empty())
    fb.strip = parse_strip_flag(o.strip);
  else if (cfg.contains("strip"))
    fb.strip = strip_from_json(cfg.at("strip"));
  if (cfg.contains("contour"))
    fb.frame_contour = contour_from_json(cfg.at("contour"));
  if (o.nodes > 0)
    fb.frame_contour = fb.frame_contour.with_nodes(std::max(o.nodes, 16));
  return fb;
}

inline std::filesystem::path out_path(const CommonOpts& o, const char* file) {
  return std::filesystem::path(o.out) / file;
}

inline void write_artifact(const CommonOpts& o, const char* file,
                           const std::string& content, EventLog& log) {
  const auto path = out_path(o, file);
  atomic_write_file(path, content);
  ojson extra;
  extra["path"] = path.string();
  extra["bytes"] = content.size();
  log.emit("write", extra);
}

}  // namespace detail

inline int run(int argc, char** argv) {
  CLI::App app{"boundary spectral computations for wedge operators"};
  app.require_subcommand(1);

  detail::CommonOpts opt;
  std::string kind_flag;
  std::string suite = "paper";

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "strip spectrum curves over the edge circle (CSV)");
  detail::add_common(spectrum, opt);

  CLI::App* frame = app.add_subcommand(
      "frame", "trace fiber frames and x d/dx eigenvalues (JSON + CSV)");
  detail::add_common(frame, opt);

  CLI::App* pairing = app.add_subcommand(
      "pairing", "boundary pairing matrices and transition smoothness "
                 "(CSV + JSON)");
  detail::add_common(pairing, opt);

  CLI::App* symbol = app.add_subcommand(
      "symbol", "derivative estimate table for an endomorphism field (CSV)");
  detail::add_common(symbol, opt);

  CLI::App* varorder = app.add_subcommand(
      "varorder", "variable-order norm of sampled data (JSON)");
  detail::add_common(varorder, opt);
  varorder->add_option("--kind", kind_flag,
                       "norm kind: varorder (default) or trace");

  CLI::App* fixture = app.add_subcommand(
      "fixture", "parameter tables of a named fixture (JSON)");
  detail::add_common(fixture, opt);

  CLI::App* check =
      app.add_subcommand("check", "run the acceptance suite");
  detail::add_common(check, opt);
  check->add_option("--suite", suite, "suite name (paper)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_diagnostic(std::cerr, "usage", e.what());
    return 2;
  }

  EventLog log(&std::cerr);
  try {
    if (spectrum->parsed()) {
      const ojson cfg = detail::load_config(
          opt, {"fixture", "operator", "strip", "contour", "tolerances",
                "grid", "threads"});
      const RunConfig run = detail::resolve_run(opt, cfg);
      const FamilyBundle fb = detail::resolve_family(opt, cfg, run);
      const int grid = detail::resolve_grid(opt, cfg, 64);
      ojson extra;
      extra["command"] = "spectrum";
      extra["label"] = fb.label;
      extra["grid"] = grid;
      log.emit("start", extra);
      const std::string csv = spectrum_csv(fb, grid, run);
      log.emit("solve");
      detail::write_artifact(opt, "spectrum.csv", csv, log);
      return 0;
    }
    if (frame->parsed()) {
      const ojson cfg = detail::load_config(
          opt, {"fixture", "operator", "strip", "contour", "tolerances",
                "grid", "threads"});
      const RunConfig run = detail::resolve_run(opt, cfg);
      const FamilyBundle fb = detail::resolve_family(opt, cfg, run);
      const int grid = detail::resolve_grid(opt, cfg, 16);
      ojson extra;
      extra["command"] = "frame";
      extra["label"] = fb.label;
      extra["grid"] = grid;
      log.emit("start", extra);
      const FrameArtifacts fa = frame_artifacts(fb, grid, run);
      log.emit("solve");
      detail::write_artifact(opt, "frame.json", fa.frame_json, log);
      detail::write_artifact(opt, "frame_xdx.csv", fa.xdx_csv, log);
      return 0;
    }
    if (pairing->parsed()) {
      const ojson cfg = detail::load_config(
          opt, {"fixture", "operator", "strip", "contour", "tolerances",
                "grid", "threads"});
      const RunConfig run = detail::resolve_run(opt, cfg);
      const FamilyBundle fb = detail::resolve_family(opt, cfg, run);
      const int grid = detail::resolve_grid(opt, cfg, 16);
      ojson extra;
      extra["command"] = "pairing";
      extra["label"] = fb.label;
      extra["grid"] = grid;
      log.emit("start", extra);
      const PairingArtifacts pa = pairing_artifacts(fb, grid, run);
      log.emit("solve");
      detail::write_artifact(opt, "pairing.csv", pa.pairing_csv, log);
      detail::write_artifact(opt, "pairing_smoothness.json",
                             pa.smoothness_json, log);
      return 0;
    }
    if (symbol->parsed()) {
      const ojson cfg = detail::load_config(
          opt, {"field", "metric", "delta", "alpha_max", "beta_max", "y0",
                "tolerances", "threads"});
      const RunConfig run = detail::resolve_run(opt, cfg);
      if (!cfg.contains("field"))
        throw ConfigError("symbol needs a config with a \"field\" entry");
      const EndomorphismField field = field_from_json(cfg.at("field"));
      const BracketMetric metric = cfg.contains("metric")
                                       ? metric_from_json(cfg.at("metric"))
                                       : BracketMetric();
      const double delta =
          cfg.contains("delta")
              ? wedgetrace::detail::number_at(cfg, "delta", "config")
              : run.delta;
      const int amax =
          cfg.contains("alpha_max")
              ? wedgetrace::detail::int_at(cfg, "alpha_max", "config")
              : 2;
      const int bmax =
          cfg.contains("beta_max")
              ? wedgetrace::detail::int_at(cfg, "beta_max", "config")
              : 2;
      const double y0 = cfg.contains("y0")
                            ? wedgetrace::detail::number_at(cfg, "y0", "config")
                            : kPi / 2.0;
      ojson extra;
      extra["command"] = "symbol";
      extra["delta"] = delta;
      log.emit("start", extra);
      const std::string csv =
          estimate_csv(field, metric, delta, amax, bmax, y0,
                       run.contour_nodes);
      log.emit("solve");
      detail::write_artifact(opt, "symbol_estimates.csv", csv, log);
      return 0;
    }
    if (varorder->parsed()) {
      const ojson cfg = detail::load_config(
          opt, {"samples", "s", "field", "metric", "kind", "tolerances",
                "threads"});
      const RunConfig run = detail::resolve_run(opt, cfg);
      if (!cfg.contains("samples") || !cfg.at("samples").is_string())
        throw ConfigError("varorder needs a \"samples\" CSV path");
      if (!cfg.contains("field"))
        throw ConfigError("varorder needs a \"field\" entry");
      const double s = wedgetrace::detail::number_at(cfg, "s", "config");
      std::string kind = kind_flag;
      if (kind.empty() && cfg.contains("kind")) {
        if (!cfg.at("kind").is_string())
          throw ConfigError("config \"kind\" must be a string");
        kind = cfg.at("kind").get<std::string>();
      }
      if (kind.empty()) kind = "varorder";
      if (kind != "varorder" && kind != "trace")
        throw ConfigError("kind must be varorder or trace");
      const EndomorphismField field = field_from_json(cfg.at("field"));
      const BracketMetric metric = cfg.contains("metric")
                                       ? metric_from_json(cfg.at("metric"))
                                       : BracketMetric();
      // A relative sample path counts from the config file, so a config and
      // its data travel as one unit.
      std::filesystem::path samples(cfg.at("samples").get<std::string>());
      if (samples.is_relative() && !opt.config.empty())
        samples = std::filesystem::path(opt.config).parent_path() / samples;
      const SampleTable table = load_samples_csv(samples);
      if (table.components() != field.rank())
        throw ConfigError("sample components do not match the field rank");
      ojson extra;
      extra["command"] = "varorder";
      extra["samples"] = static_cast<int>(table.u.size());
      log.emit("start", extra);
      const std::string json = norm_json(table, field, metric, s,
                                         kind == "trace", run.contour_nodes);
      log.emit("solve");
      detail::write_artifact(opt, "varorder_norm.json", json, log);
      return 0;
    }
    if (fixture->parsed()) {
      const ojson cfg = detail::load_config(opt, {"fixture"});
      std::string name = opt.fixture;
      if (name.empty() && cfg.contains("fixture"))
        name = cfg.at("fixture").get<std::string>();
      if (name.empty()) {
        std::string names;
        for (const auto& n : fixture_names()) names += " " + n;
        throw ConfigError("fixture needs --fixture; registry holds" + names);
      }
      ojson extra;
      extra["command"] = "fixture";
      extra["name"] = name;
      log.emit("start", extra);
      const std::string json = fixture_json(name);
      detail::write_artifact(opt, "fixture.json", json, log);
      return 0;
    }
    if (check->parsed()) {
      const ojson cfg = detail::load_config(opt, {"suite", "threads"});
      const RunConfig run = detail::resolve_run(opt, cfg);
      std::string which = suite;
      if (check->count("--suite") == 0 && cfg.contains("suite"))
        which = cfg.at("suite").get<std::string>();
      if (which != "paper")
        throw ConfigError("unknown suite \"" + which + "\"; only paper exists");
      ojson extra;
      extra["command"] = "check";
      extra["suite"] = which;
      extra["threads"] = run.threads;
      log.emit("start", extra);
      const auto results = run_acceptance_suite(run.threads);
      const bool all = report_suite(results, std::cout);
      log.emit("solve");
      if (check->count("--out") > 0)
        detail::write_artifact(opt, "check_report.json",
                               suite_report_json(results).dump(2) + "\n", log);
      return all ? 0 : 4;
    }
  } catch (const ConfigError& e) {
    emit_diagnostic(std::cerr, "config", e.what());
    return 2;
  } catch (const Error& e) {
    emit_diagnostic(std::cerr, "numerical", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_diagnostic(std::cerr, "internal", e.what());
    return 3;
  }
  emit_diagnostic(std::cerr, "usage", "no subcommand selected");
  return 2;
}

}  // namespace wedgetrace::cli
