// lze: command-line front end for the Learning-Zone Energy selector.
//
//   lze sim     run the training loop on the toy environment, write metrics
//   lze select  sidecar mode: rollout log in, per-step selections out
//   lze verify  check the scoring / variance / FLOPs identities
//   lze flops   print the cost-model report

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lze/config.hpp"
#include "lze/error.hpp"
#include "lze/runner.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfigParse = 3,
  kConfigInvalid = 4,
  kMalformedInput = 5,
  kOutOfOrder = 6,
  kUnknownPrompt = 7,
  kVerifyFailed = 8,
  kIo = 9,
  kDomain = 10,
};

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  bad command line\n"
    "  3  config parse error (malformed line, unknown key, unparsable value)\n"
    "  4  config validation error (value outside its bound)\n"
    "  5  malformed rollout-log line\n"
    "  6  rollout log steps out of order\n"
    "  7  prompt seen before the step-0 initialization pass\n"
    "  8  a verify check failed\n"
    "  9  file could not be opened\n"
    " 10  other invalid parameters\n"
    "Environment: LZE_SEED sets the default seed (config and flags override it).";

int exit_code_for(lze::ErrorCode code) {
  using lze::ErrorCode;
  switch (code) {
    case ErrorCode::ParseError: return kConfigParse;
    case ErrorCode::ValidationError: return kConfigInvalid;
    case ErrorCode::MalformedLine: return kMalformedInput;
    case ErrorCode::OutOfOrderStep: return kOutOfOrder;
    case ErrorCode::UnknownPromptBeforeInit: return kUnknownPrompt;
    case ErrorCode::IoError: return kIo;
    default: return kDomain;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lze::Error(lze::ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a file, or stdout for "" / "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw lze::Error(lze::ErrorCode::IoError, "cannot open " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;
  std::list<std::string> storage;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "key = value config file");
    app->add_option("--set", sets, "override a config key (KEY=VALUE), repeatable");
  }

  // Registers a flag that maps onto a config key; flags win over --set.
  // Values are checked by the config loader, so they are bound as strings.
  void flag(CLI::App* app, const std::string& name, const std::string& key,
            const std::string& help) {
    std::string& value = storage.emplace_back();
    app->add_option(name, value, help)->each([this, key](const std::string& v) {
      flags.emplace_back(key, v);
    });
  }

  lze::RunConfig load(lze::Mode mode) const {
    std::string text = config_path.empty() ? std::string() : read_file(config_path);
    text += "\nmode = ";
    text += lze::to_string(mode);
    text += '\n';
    for (const std::string& s : sets) {
      if (s.find('=') == std::string::npos)
        throw lze::Error(lze::ErrorCode::ParseError, "--set expects KEY=VALUE, got " + s);
      text += s + '\n';
    }
    for (const auto& [k, v] : flags) text += k + " = " + v + '\n';
    return lze::load_config(text);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-Zone Energy data selection: scoring, selection, pruning, FLOPs"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  CommonOptions sim_opts, select_opts, verify_opts, flops_opts;

  auto* sim = app.add_subcommand("sim", "Run the training loop on the toy environment");
  sim_opts.attach(sim);
  sim_opts.flag(sim, "--seed", "seed", "run seed");
  sim_opts.flag(sim, "--epochs", "epochs", "number of epochs");
  sim_opts.flag(sim, "--strategy", "strategy", "lze | uniform | full");
  sim_opts.flag(sim, "--kappa", "kappa", "selection ratio");
  sim_opts.flag(sim, "--gumbel-scale", "gumbel_scale", "Gumbel noise scale");
  sim_opts.flag(sim, "-m,--metrics", "metrics", "metrics output (default stdout)");

  auto* select = app.add_subcommand("select", "Sidecar mode over a rollout log");
  select_opts.attach(select);
  select_opts.flag(select, "--seed", "seed", "selection seed");
  select_opts.flag(select, "--kappa", "kappa", "selection ratio");
  select_opts.flag(select, "--gumbel-scale", "gumbel_scale", "Gumbel noise scale");
  select_opts.flag(select, "-i,--input", "input", "rollout log (default stdin)");
  select_opts.flag(select, "-o,--output", "output", "selection trace (default stdout)");
  select_opts.flag(select, "-m,--metrics", "metrics",
                   "advisory prune/replay events and selection metrics");

  auto* verify = app.add_subcommand("verify", "Check the scoring, variance and FLOPs identities");
  verify_opts.attach(verify);
  verify_opts.flag(verify, "--seed", "seed", "oracle seed");
  verify_opts.flag(verify, "--trials", "verify_trials", "Monte-Carlo trials per variance cell");

  auto* flops = app.add_subcommand("flops", "Print the cost-model report");
  flops_opts.attach(flops);
  flops_opts.flag(flops, "--kappa", "kappa", "selection ratio");
  flops_opts.flag(flops, "--epochs", "flops_epochs", "epochs E");
  flops_opts.flag(flops, "--dataset-size", "dataset_size", "dataset size |D|");
  flops_opts.flag(flops, "--rollouts", "n_rollouts", "rollouts per prompt");
  flops_opts.flag(flops, "--params", "params", "model parameters P");
  flops_opts.flag(flops, "--tokens", "tokens_per_sample", "tokens per sample T");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (sim->parsed()) {
      const lze::RunConfig cfg = sim_opts.load(lze::Mode::Sim);
      Sink out(cfg.metrics);
      lze::run_sim(cfg, out.stream());
    } else if (select->parsed()) {
      const lze::RunConfig cfg = select_opts.load(lze::Mode::LogDriven);
      Sink out(cfg.output);
      std::optional<Sink> metrics;
      if (!cfg.metrics.empty()) metrics.emplace(cfg.metrics);
      std::ostream* metrics_stream = metrics ? &metrics->stream() : nullptr;
      if (cfg.input.empty() || cfg.input == "-") {
        lze::run_log_driven(cfg, std::cin, out.stream(), metrics_stream);
      } else {
        std::ifstream in(cfg.input);
        if (!in) throw lze::Error(lze::ErrorCode::IoError, "cannot open " + cfg.input);
        lze::run_log_driven(cfg, in, out.stream(), metrics_stream);
      }
    } else if (verify->parsed()) {
      const lze::RunConfig cfg = verify_opts.load(lze::Mode::Verify);
      if (!lze::run_verify(cfg, std::cout)) return kVerifyFailed;
    } else if (flops->parsed()) {
      const lze::RunConfig cfg = flops_opts.load(lze::Mode::Flops);
      lze::run_flops(cfg, std::cout);
    }
  } catch (const lze::Error& e) {
    std::cerr << "lze: " << lze::to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "lze: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
