#include "cli/app.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>

#include "cli/commands.hpp"
#include "cli/config_file.hpp"
#include "triplesum/error.hpp"

namespace triplesum::cli {

namespace fs = std::filesystem;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::string stem = path;
  if (stem.ends_with(".jsonl")) stem.resize(stem.size() - 6);
  return stem + suffix;
}

void check_outputs(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  for (const auto& o : outputs) {
    if (o.empty()) continue;
    for (const auto& i : inputs) {
      if (i.empty()) continue;
      std::error_code ec;
      if (o == i || (fs::exists(o) && fs::equivalent(o, i, ec)))
        throw UsageError("output " + o + " would overwrite input " + i);
    }
  }
}

std::vector<AlignedExample> load_corpus(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_examples_jsonl(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

Vocabulary load_vocabulary(const std::string& path, VocabSide expected) {
  auto in = open_input(path);
  Vocabulary v = [&] {
    try {
      return Vocabulary::load(in);
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
  }();
  if (v.side() != expected)
    throw DataError(path + " is a " + std::string(to_string(v.side())) + " vocabulary, expected " +
                    std::string(to_string(expected)));
  return v;
}

SurfaceLexicon load_lexicon(const std::string& path) {
  auto in = open_input(path);
  return SurfaceLexicon::read_tsv(in);
}

namespace {

void setup_logging(const std::string& level) {
  auto logger = spdlog::get("triplesum");
  if (!logger) logger = spdlog::stderr_color_mt("triplesum");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
  logger->set_level(spdlog::level::from_str(level));
  spdlog::set_default_logger(logger);
}

// Config entries become `--key=value` arguments placed right after the
// subcommand name, so anything on the real command line comes later and
// wins under the take-last policy.
std::vector<std::string> inject_config(const std::vector<std::string>& args, const std::vector<Command>& commands) {
  const std::string path = config_path(args);
  if (path.empty()) return args;
  const auto entries = read_config_file(path);

  auto pos = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return std::any_of(commands.begin(), commands.end(), [&](const Command& c) { return c.app->get_name() == a; });
  });
  if (pos == args.end()) return args;
  const Command& cmd = *std::find_if(commands.begin(), commands.end(),
                                     [&](const Command& c) { return c.app->get_name() == *pos; });

  std::vector<std::string> injected;
  for (const auto& e : entries) {
    if (e.key == "config") continue;
    const CLI::Option* opt = cmd.app->get_option_no_throw("--" + e.key);
    if (!opt) {
      const bool known_elsewhere = std::any_of(commands.begin(), commands.end(), [&](const Command& c) {
        return c.app->get_option_no_throw("--" + e.key) != nullptr;
      });
      if (!known_elsewhere) spdlog::warn("config {}:{}: unknown key '{}' ignored", path, e.line, e.key);
      continue;
    }
    injected.push_back("--" + e.key + "=" + e.value);
  }
  std::vector<std::string> out(args.begin(), pos + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), pos + 1, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Triples-to-text toolkit: corpus building, training, generation and evaluation.", "triplesum"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  setup_logging("info");

  std::vector<Command> commands;
  add_corpus_commands(app, commands);
  add_model_commands(app, commands);
  add_eval_commands(app, commands);
  std::string unused_config;
  for (auto& c : commands)
    c.app->add_option("--config", unused_config, "key = value defaults; flags win (env " + std::string(kConfigEnv) + ")");

  try {
    std::vector<std::string> argv = inject_config(args, commands);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  }
  setup_logging(log_level);

  for (auto& c : commands) {
    if (!app.got_subcommand(c.app)) continue;
    try {
      c.run();
      return kExitOk;
    } catch (const UsageError& e) {
      spdlog::error("{}", e.what());
      return kExitUsage;
    } catch (const DataError& e) {
      spdlog::error("data error: {}", e.what());
      return kExitData;
    } catch (const NumericError& e) {
      spdlog::error("numeric failure: {}", e.what());
      return kExitRuntime;
    } catch (const CheckpointError& e) {
      spdlog::error("checkpoint error: {}", e.what());
      return kExitRuntime;
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      return kExitRuntime;
    }
  }
  return kExitUsage;
}

}  // namespace triplesum::cli
