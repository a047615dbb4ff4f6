#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "mixpanjer/commands.hpp"
#include "mixpanjer/config.hpp"
#include "mixpanjer/errors.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::string svg;
  std::optional<std::size_t> nodes;
  std::optional<std::uint64_t> seed;
};

using Command = std::function<mixpanjer::CommandOutput(const std::vector<mixpanjer::ModelConfig>&,
                                                      mixpanjer::OutputFormat, bool)>;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw mixpanjer::ConfigError("cannot write '" + path + "'");
  f << text;
  if (!f) throw mixpanjer::ConfigError("failed writing '" + path + "'");
}

int run(const Options& opt, const Command& command) {
  try {
    auto configs = mixpanjer::load_config(opt.config);
    for (auto& c : configs) {
      if (opt.nodes) {
        if (*opt.nodes == 0) throw mixpanjer::ConfigError("--nodes must be >= 1");
        c.nodes = *opt.nodes;
      }
      if (opt.seed) c.seed = *opt.seed;
    }
    const auto format = opt.format == "json" ? mixpanjer::OutputFormat::Json : mixpanjer::OutputFormat::Csv;
    const auto result = command(configs, format, !opt.svg.empty());
    if (opt.out.empty() || opt.out == "-") {
      std::cout << result.text;
      std::cout.flush();
    } else {
      write_file(opt.out, result.text);
    }
    if (!opt.svg.empty()) write_file(opt.svg, result.svg);
    return 0;
  } catch (const mixpanjer::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const mixpanjer::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed Panjer count and aggregate-claims distributions"};
  app.require_subcommand(1);

  Options opt;
  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"count-pmf", {mixpanjer::cmd_count_pmf, "Mixed claim-number pmf with ratio diagnostics C_n"}},
      {"aggregate", {mixpanjer::cmd_aggregate, "Aggregate-claims pmf of the mixed compound model"}},
      {"tail", {mixpanjer::cmd_tail, "Tail P(S > u) for geometric counts with exponential claims"}},
      {"simulate", {mixpanjer::cmd_simulate, "Monte Carlo report for the hierarchical model"}},
      {"thin", {mixpanjer::cmd_thin, "Thinned claim-number maps and pmf"}},
      {"convolve", {mixpanjer::cmd_convolve, "Mixed n-fold convolution of the claim law"}},
  };

  const Command* selected = nullptr;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("--config", opt.config, "Model config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output path (default: stdout)");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--svg", opt.svg, "Also write an SVG plot to this path");
    sub->add_option("--nodes", opt.nodes, "Override the quadrature node count");
    sub->add_option("--seed", opt.seed, "Override the simulation seed");
    const Command* cmd = &entry.first;
    sub->callback([&selected, cmd] { selected = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(opt, *selected);
}
