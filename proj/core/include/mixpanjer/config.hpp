#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixpanjer/compound.hpp"
#include "mixpanjer/counts.hpp"
#include "mixpanjer/mc_oracle.hpp"
#include "mixpanjer/mixing.hpp"
#include "mixpanjer/param_maps.hpp"

namespace mixpanjer {

struct TailSpec {
  ParameterMap rho2;
  ParameterMap v;
};

struct ClosedFormSpec {
  ClosedForm kind;
  std::vector<double> params;
};

enum class CountMethod { Mixture, Laplace, ClosedForm };

/// One fully resolved run configuration (one plotted series).
struct ModelConfig {
  std::string label;
  std::optional<MixingLaw> mixing;
  std::optional<CountModel> count;
  std::optional<ClaimSpec> claims;
  std::size_t nodes = kDefaultNodeCount;
  std::optional<std::size_t> x_max;  // nullopt selects auto_x_max
  std::size_t n_max = 30;
  bool emit_D = false;
  std::uint64_t seed = 1;
  std::size_t paths = 100000;
  unsigned threads = 1;
  std::vector<double> u_grid;
  std::optional<TailSpec> tail;
  std::optional<ParameterMap> thin_v;
  std::optional<ClosedFormSpec> closed_form;
  CountMethod count_method = CountMethod::Mixture;
  unsigned convolve_n = 2;

  QuadratureRule rule() const;
};

/// Parses a config document. A top-level "panels" array expands into one
/// config per panel. Each top-level key of a panel replaces the same key of
/// the base document; a null value removes it.
/// Throws ConfigError with a field path on any invalid entry.
std::vector<ModelConfig> parse_config(const std::string& json_text);
std::vector<ModelConfig> load_config(const std::filesystem::path& path);

}  // namespace mixpanjer
