#include <iostream>

#ifdef __unix__
#include <unistd.h>
#endif

#include <CLI11.hpp>

#include "bqldb/bqldb.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStatementError = 1;
constexpr int kExitIoError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bqldb - probabilistic queries over tabular data"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string workspace = ".";
  std::string format = "table";
  std::size_t threads = 0;
  std::optional<std::size_t> models;
  app.add_option("--seed", seed, "session RNG seed")->capture_default_str();
  app.add_option("--workspace", workspace, "session workspace directory")
      ->capture_default_str();
  app.add_option("--format", format, "result format: table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", threads, "ANALYZE worker threads (0 = all cores)");
  auto* models_opt = app.add_option("--models", "override k in INITIALIZE statements");

  auto* repl_cmd = app.add_subcommand("repl", "interactive session");
  std::string open_dir;
  repl_cmd->add_option("--open", open_dir, "open a saved workspace first");

  auto* run_cmd = app.add_subcommand("run", "execute a .bql script");
  std::string script;
  run_cmd->add_option("script", script, "script path")->required();

  auto* export_cmd = app.add_subcommand("export", "export plot data from a workspace");
  std::string export_what, export_pop, export_path;
  export_cmd->add_option("what", export_what, "artifact kind (heatmap)")->required();
  export_cmd->add_option("population", export_pop)->required();
  export_cmd->add_option("out", export_path, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  bqldb::cli::Session session;
  session.set_seed(seed);
  session.workspace = workspace;
  session.threads = threads;
  if (models_opt->count()) models = models_opt->as<std::size_t>();
  session.models_override = models;

  bqldb::cli::OutputFormat fmt;
  try {
    fmt = bqldb::cli::format_from_name(format);
  } catch (const bqldb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }

  try {
    if (repl_cmd->parsed()) {
      if (!open_dir.empty()) session = bqldb::cli::open_session(open_dir);
      session.workspace = workspace;
      session.threads = threads;
      session.models_override = models;
      if (seed != 0 || open_dir.empty()) session.set_seed(seed);
      bool prompt = true;
#ifdef __unix__
      prompt = isatty(0) != 0;
#endif
      return bqldb::cli::run_repl(session, std::cin, std::cout, fmt, prompt);
    }
    if (run_cmd->parsed()) {
      std::string text;
      try {
        text = bqldb::read_file(script);
      } catch (const bqldb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
      }
      int rc = bqldb::cli::run_script_text(session, text, std::cout, fmt);
      return rc == 0 ? kExitOk : kExitStatementError;
    }
    if (export_cmd->parsed()) {
      if (export_what != "heatmap") {
        std::cerr << "error: unknown export kind '" << export_what << "'\n";
        return kExitIoError;
      }
      bqldb::cli::Session opened;
      try {
        opened = bqldb::cli::open_session(workspace);
      } catch (const bqldb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
      }
      bqldb::cli::export_heatmap(opened.require(export_pop), export_path);
      std::cout << "ok: wrote " << export_path << " and " << export_path << ".order\n";
      return kExitOk;
    }
  } catch (const bqldb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStatementError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  return kExitOk;
}
