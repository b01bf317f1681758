// hsgp <synth|augment|train|eval|saliency|sweep> --config cfg.json [--key value ...]
//
// Any config key can be overridden on the command line as --key value or
// --key=value (dashes and underscores are interchangeable). Failures print a
// JSON object on stderr and exit with 2 (config), 3 (data) or 4 (numeric).

#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hsgp/errors.hpp"
#include "hsgp/pipeline.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kDataExit = 3;
constexpr int kNumericExit = 4;

int report_error(std::string_view code, std::string_view klass, const std::string& message, int exit_code) {
  nlohmann::json doc{{"error", code}, {"class", klass}, {"message", message}};
  std::cerr << doc.dump() << '\n';
  return exit_code;
}

std::string key_name(std::string flag) {
  flag.erase(0, flag.find_first_not_of('-'));
  std::replace(flag.begin(), flag.end(), '-', '_');
  if (flag == "input_dir") return "data_dir";
  return flag;
}

std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& arg = extras[i];
    if (arg.rfind("--", 0) != 0)
      throw hsgp::Error(hsgp::ErrorCode::ConfigError, "unexpected argument '" + arg + "'");
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(key_name(arg.substr(0, eq)), arg.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(key_name(arg), extras[++i]);
    } else {
      throw hsgp::Error(hsgp::ErrorCode::ConfigError, "option " + arg + " needs a value");
    }
  }
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    const auto token = text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw hsgp::Error(hsgp::ErrorCode::ConfigError, "bad sweep value '" + token + "'");
    }
    start = comma + 1;
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical signed-graph contrastive learning for correlation networks"};
  app.allow_extras();
  app.footer("Any config key may be given as --key value; flags override the config file.");

  std::string command;
  std::optional<std::string> config_file;
  std::optional<std::string> report;
  std::string sweep_param;
  std::string sweep_values;
  app.add_option("command", command, "synth | augment | train | eval | saliency | sweep")->required();
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--report", report, "augment: report JSON path");
  app.add_option("--param", sweep_param, "sweep: window_size | mu1 | mu2 | ratio");
  app.add_option("--values", sweep_values, "sweep: comma-separated grid values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ConfigError", "config", e.what(), kConfigExit);
  }

  try {
    const auto cmd = hsgp::parse_command(command);
    std::optional<std::filesystem::path> config_path;
    if (config_file) config_path = *config_file;
    const auto cfg = hsgp::resolve_run_config(config_path, parse_overrides(app.remaining()));

    hsgp::CommandOptions options;
    if (report) options.report = *report;
    if (cmd == hsgp::Command::Sweep) {
      if (sweep_param.empty() || sweep_values.empty())
        throw hsgp::Error(hsgp::ErrorCode::ConfigError, "sweep needs --param and --values");
      options.sweep_param = sweep_param;
      options.sweep_values = parse_values(sweep_values);
    }
    hsgp::run_pipeline(cmd, cfg, options);
  } catch (const hsgp::Error& e) {
    const auto klass = hsgp::classify(e.code());
    switch (klass) {
      case hsgp::ErrorClass::Config: return report_error(hsgp::to_string(e.code()), "config", e.what(), kConfigExit);
      case hsgp::ErrorClass::Data: return report_error(hsgp::to_string(e.code()), "data", e.what(), kDataExit);
      case hsgp::ErrorClass::Numeric:
        return report_error(hsgp::to_string(e.code()), "numeric", e.what(), kNumericExit);
    }
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("DataError", "data", e.what(), kDataExit);
  }
  return 0;
}
