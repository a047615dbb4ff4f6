#pragma once

#include <string>
#include <vector>

#include "mixpanjer/config.hpp"

namespace mixpanjer {

enum class OutputFormat { Csv, Json };

struct CommandOutput {
  std::string text;
  std::string svg;  // empty unless requested
};

/// Each command runs every config (series) and renders them together. With
/// more than one series the CSV output gains a leading "series" column.
CommandOutput cmd_count_pmf(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg);
CommandOutput cmd_aggregate(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg);
CommandOutput cmd_tail(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg);
CommandOutput cmd_simulate(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg);
CommandOutput cmd_thin(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg);
CommandOutput cmd_convolve(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg);

/// u grid used by the tail command when a config gives none: 0.25, 0.5, ..., 20.
std::vector<double> default_u_grid();

}  // namespace mixpanjer
