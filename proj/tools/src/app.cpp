#include "otrf_cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "otrf/error.hpp"
#include "otrf_cli/config.hpp"
#include "otrf_cli/experiments.hpp"

namespace otrf::cli {

namespace {

struct Flags {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InvalidRequest("cannot write " + path.string());
  file << contents;
  if (!file) throw InvalidRequest("failed writing " + path.string());
}

int execute(const std::string& kind, const Flags& flags, std::ostream& out) {
  Config cfg = flags.config.empty() ? Config() : Config::from_file(flags.config);
  if (flags.seed) cfg.set("run.seed", std::to_string(*flags.seed));
  if (flags.threads) cfg.set("run.threads", std::to_string(*flags.threads));
  const std::string named = cfg.get_string("run.experiment", kind);
  if (named != kind)
    throw InvalidRequest("config names experiment '" + named + "' but the subcommand is '" + kind + "'");

  RunContext ctx;
  ctx.seed = cfg.get_seed("run.seed");
  ctx.threads = cfg.get_int("run.threads", 1);
  if (ctx.threads < 1) throw InvalidRequest("run.threads must be positive");

  RunResult result = run_experiment(kind, cfg, ctx);

  json summary = {{"experiment", kind}, {"seed", ctx.seed}};
  summary.update(result.summary);

  const std::filesystem::path dir(flags.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidRequest("cannot create output directory " + dir.string() + ": " + ec.message());

  std::ostringstream trials, echo;
  result.trials.write(trials);
  cfg.write_echo(echo);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_file(dir / "trials.csv", trials.str());
  write_file(dir / "config.echo", echo.str());
  for (const auto& [name, contents] : result.artifacts) write_file(dir / name, contents);

  out << kind << ": " << result.trials.rows().size() << " trial rows written to " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmarks for optimal-transport-coupled random features"};
  app.name("otrf");
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  for (const auto& kind : experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(kind, experiment_description(kind));
    sub->add_option("--config", flags.config, "INI run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "master seed (overrides run.seed)");
    sub->add_option("--out-dir", flags.out_dir, "directory for summary.json, trials.csv, config.echo")
        ->capture_default_str();
    sub->add_option("--threads", flags.threads, "worker threads (overrides run.threads)");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "otrf: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    return execute(chosen, flags, out);
  } catch (const NumericFailure& e) {
    err << "otrf " << chosen << ": numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const InvalidRequest& e) {
    err << "otrf " << chosen << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "otrf " << chosen << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "otrf " << chosen << ": internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace otrf::cli
