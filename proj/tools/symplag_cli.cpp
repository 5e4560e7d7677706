// symplag: command-line front end. See README for commands and config keys.

#include <CLI11.hpp>

#include <iostream>

#include "symplag/app.hpp"

namespace {

// key=value with a JSON value, or a bare string when the value is not JSON.
void apply_set(symplag::app::json& params, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw symplag::ConfigError("--set expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
  symplag::app::json value;
  try {
    value = symplag::app::json::parse(raw);
  } catch (const symplag::app::json::exception&) {
    value = raw;
  }
  // Dotted keys address nested objects: section5.p=3.
  symplag::app::json* node = &params;
  std::size_t start = 0, dot;
  while ((dot = key.find('.', start)) != std::string::npos) {
    node = &(*node)[key.substr(start, dot - start)];
    if (!node->is_object()) *node = symplag::app::json::object();
    start = dot + 1;
  }
  (*node)[key.substr(start)] = value;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace symplag;
  CLI::App cli{"Lagrangian surfaces in R^4: invariants, frames, immersions"};
  cli.set_version_flag("--version", app::kVersion);

  std::string command, config_path, out_dir, grid_spec;
  std::vector<std::string> sets;
  std::map<std::string, double> tol_override;
  bool quiet = false;

  cli.add_option("command", command, "verify | integrate | example | family | invariants | congruence | export");
  cli.add_option("--config", config_path, "JSON job configuration");
  cli.add_option("--out", out_dir, "output directory (overrides config.output_dir)");
  cli.add_option("--grid", grid_spec, "grid geometry nx,ny,x0,y0,dx,dy");
  cli.add_option("--set", sets, "parameter override key=value (dotted keys nest)");
  cli.add_flag("-q,--quiet", quiet, "print only the status line");
  for (const auto& name : app::tolerance_names())
    cli.add_option("--tol-" + name, tol_override[name], "override tol_" + name);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    app::JobConfig cfg;
    if (!config_path.empty()) cfg = app::JobConfig::from_json(io::read_json(config_path));
    if (!command.empty()) cfg.command = command;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!grid_spec.empty()) {
      cfg.grid = app::parse_grid_spec(grid_spec);
      cfg.has_grid = true;
    }
    for (const auto& s : sets) apply_set(cfg.params, s);
    for (const auto& name : app::tolerance_names())
      if (cli.get_option("--tol-" + name)->count()) app::tol_ref(cfg.tol, name) = tol_override[name];

    const auto report = app::run(cfg);
    if (quiet)
      std::cout << report["status"].get<std::string>() << "\n";
    else
      std::cout << report.dump(2) << "\n";
    return app::exit_code_for(report);
  } catch (const ConfigError& e) {
    std::cerr << "ConfigError: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "IoError: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
