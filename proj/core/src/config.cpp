#include "mixpanjer/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mixpanjer/errors.hpp"

namespace mixpanjer {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(fmt::format("{}: {}", path.empty() ? "/" : path, message));
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t count_value(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key())) fail(path + "/" + it.key(), "unknown field");
}

// Runs `fn`, re-throwing library errors as ConfigError at `path`.
template <class Fn>
auto at(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

ParameterMap parse_map(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a map object {\"map\": ..., \"params\": [...]}");
  only_keys(j, {"map", "params"}, path);
  const std::string name = text(field(j, "map", path), path + "/map");
  std::vector<double> params;
  if (auto it = j.find("params"); it != j.end()) {
    if (!it->is_array()) fail(path + "/params", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) params.push_back(number((*it)[k], fmt::format("{}/params/{}", path, k)));
  }
  return at(path, [&] { return ParameterMap::from_name(name, params); });
}

MixingLaw parse_mixing(const json& j, const std::string& path) {
  only_keys(j, {"law", "params"}, path);
  const std::string name = text(field(j, "law", path), path + "/law");
  const std::string ppath = path + "/params";
  const json& params = field(j, "params", path);
  if (!params.is_object()) fail(ppath, "expected an object of named parameters");
  auto get = [&](const char* key) { return number(field(params, key, ppath), ppath + "/" + key); };
  auto keys = [&](std::set<std::string> allowed) { only_keys(params, allowed, ppath); };
  return at(path, [&]() -> MixingLaw {
    if (name == "Degenerate") return keys({"theta0"}), MixingLaw(law::Degenerate{get("theta0")});
    if (name == "Gamma") return keys({"alpha", "beta"}), MixingLaw(law::Gamma{get("alpha"), get("beta")});
    if (name == "Exponential") return keys({"beta"}), MixingLaw(law::Exponential{get("beta")});
    if (name == "Beta") return keys({"alpha", "beta"}), MixingLaw(law::Beta{get("alpha"), get("beta")});
    if (name == "InverseGaussian")
      return keys({"mu", "phi"}), MixingLaw(law::InverseGaussian{get("mu"), get("phi")});
    if (name == "Lindley") return keys({"beta"}), MixingLaw(law::Lindley{get("beta")});
    if (name == "PoissonMix") return keys({"a"}), MixingLaw(law::PoissonMix{get("a")});
    if (name == "ExpGammaMixture")
      return keys({"w1", "w2", "alpha", "beta"}),
             MixingLaw(law::ExpGammaMixture{get("w1"), get("w2"), get("alpha"), get("beta")});
    fail(path + "/law", fmt::format("unknown mixing law '{}'", name));
  });
}

CountModel parse_count(const json& j, const MixingLaw& law, const std::string& path) {
  const std::string fam = text(field(j, "family", path), path + "/family");
  if (fam == "MP") {
    only_keys(j, {"family", "xi"}, path);
    ParameterMap xi = parse_map(field(j, "xi", path), path + "/xi");
    return at(path + "/xi", [&] { return CountModel(family::MP{xi}, law); });
  }
  if (fam == "MB") {
    only_keys(j, {"family", "m", "z2"}, path);
    const std::size_t m = count_value(field(j, "m", path), path + "/m");
    ParameterMap z2 = parse_map(field(j, "z2", path), path + "/z2");
    return at(path, [&] { return CountModel(family::MB{static_cast<unsigned>(m), z2}, law); });
  }
  if (fam == "MNB") {
    only_keys(j, {"family", "rho1", "rho2"}, path);
    ParameterMap rho1 = parse_map(field(j, "rho1", path), path + "/rho1");
    ParameterMap rho2 = parse_map(field(j, "rho2", path), path + "/rho2");
    return at(path, [&] { return CountModel(family::MNB{rho1, rho2}, law); });
  }
  fail(path + "/family", fmt::format("unknown count family '{}' (expected MP, MB or MNB)", fam));
}

ClaimSpec parse_claims(const json& j, const MixingLaw& law, const std::string& path) {
  const std::string fam = text(field(j, "family", path), path + "/family");
  if (fam == "ConditionalExponential") {
    only_keys(j, {"family", "rate"}, path);
    ParameterMap rate = parse_map(field(j, "rate", path), path + "/rate");
    if (!check_range(rate, law.support(), Interval::positive()))
      fail(path + "/rate", fmt::format("map {} does not send {} into (0, inf)", rate.name(), to_string(law.support())));
    return ConditionalExponential{rate};
  }
  if (fam == "DegenerateAtOne") {
    only_keys(j, {"family"}, path);
    return ClaimModel(claim::DegenerateAtOne{});
  }
  only_keys(j, {"family", "v"}, path);
  const ParameterMap v = parse_map(field(j, "v", path), path + "/v");
  ClaimModel model = [&]() -> ClaimModel {
    if (fam == "GeometricOnN0") return ClaimModel(claim::GeometricOnN0{v});
    if (fam == "ZeroTruncGeometric") return ClaimModel(claim::ZeroTruncGeometric{v});
    if (fam == "Bernoulli") return ClaimModel(claim::Bernoulli{v});
    fail(path + "/family", fmt::format("unknown claim family '{}'", fam));
  }();
  at(path + "/v", [&] {
    model.validate(law.support());
    return 0;
  });
  return model;
}

ModelConfig parse_single(const json& doc) {
  if (!doc.is_object()) fail("", "config must be a JSON object");
  only_keys(doc,
            {"label", "description", "figure", "mixing", "count", "claims", "nodes", "x_max", "n_max", "emit_D", "seed",
             "paths", "threads", "u_grid", "tail", "thin", "closed_form", "count_method", "convolve_n"},
            "");
  ModelConfig cfg;
  if (auto it = doc.find("label"); it != doc.end()) cfg.label = text(*it, "/label");
  if (auto it = doc.find("nodes"); it != doc.end()) {
    cfg.nodes = count_value(*it, "/nodes");
    if (cfg.nodes == 0) fail("/nodes", "must be >= 1");
  }
  if (auto it = doc.find("mixing"); it != doc.end()) cfg.mixing = parse_mixing(*it, "/mixing");
  if (auto it = doc.find("count"); it != doc.end()) {
    if (!cfg.mixing) fail("/count", "a count model requires a mixing law");
    cfg.count = parse_count(*it, *cfg.mixing, "/count");
  }
  if (auto it = doc.find("claims"); it != doc.end()) {
    if (!cfg.mixing) fail("/claims", "a claim model requires a mixing law");
    cfg.claims = parse_claims(*it, *cfg.mixing, "/claims");
  }
  if (auto it = doc.find("x_max"); it != doc.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto") fail("/x_max", "expected an integer or \"auto\"");
    } else {
      cfg.x_max = count_value(*it, "/x_max");
    }
  }
  if (auto it = doc.find("n_max"); it != doc.end()) cfg.n_max = count_value(*it, "/n_max");
  if (auto it = doc.find("emit_D"); it != doc.end()) {
    if (!it->is_boolean()) fail("/emit_D", "expected true or false");
    cfg.emit_D = it->get<bool>();
  }
  if (auto it = doc.find("seed"); it != doc.end()) cfg.seed = count_value(*it, "/seed");
  if (auto it = doc.find("paths"); it != doc.end()) {
    cfg.paths = count_value(*it, "/paths");
    if (cfg.paths == 0) fail("/paths", "must be >= 1");
  }
  if (auto it = doc.find("threads"); it != doc.end())
    cfg.threads = static_cast<unsigned>(std::max<std::size_t>(1, count_value(*it, "/threads")));
  if (auto it = doc.find("u_grid"); it != doc.end()) {
    if (!it->is_array()) fail("/u_grid", "expected an array of numbers");
    for (std::size_t k = 0; k < it->size(); ++k) cfg.u_grid.push_back(number((*it)[k], fmt::format("/u_grid/{}", k)));
  }
  if (auto it = doc.find("tail"); it != doc.end()) {
    only_keys(*it, {"rho2", "v"}, "/tail");
    TailSpec spec{parse_map(field(*it, "rho2", "/tail"), "/tail/rho2"), parse_map(field(*it, "v", "/tail"), "/tail/v")};
    if (cfg.mixing) {
      if (!check_range(spec.rho2, cfg.mixing->support(), Interval::unit_open()))
        fail("/tail/rho2", "map must send the mixing support into (0, 1)");
      if (!check_range(spec.v, cfg.mixing->support(), Interval::positive()))
        fail("/tail/v", "map must send the mixing support into (0, inf)");
    }
    cfg.tail = spec;
  }
  if (auto it = doc.find("thin"); it != doc.end()) {
    only_keys(*it, {"v"}, "/thin");
    ParameterMap v = parse_map(field(*it, "v", "/thin"), "/thin/v");
    if (cfg.mixing && !check_range(v, cfg.mixing->support(), Interval::unit_right_closed()))
      fail("/thin/v", "retention probability map must send the mixing support into (0, 1]");
    cfg.thin_v = v;
  }
  if (auto it = doc.find("closed_form"); it != doc.end()) {
    only_keys(*it, {"kind", "params"}, "/closed_form");
    ClosedFormSpec spec{at("/closed_form/kind",
                           [&] { return closed_form_from_name(text(field(*it, "kind", "/closed_form"), "/closed_form/kind")); }),
                        {}};
    const json& params = field(*it, "params", "/closed_form");
    if (!params.is_array()) fail("/closed_form/params", "expected an array");
    for (std::size_t k = 0; k < params.size(); ++k)
      spec.params.push_back(number(params[k], fmt::format("/closed_form/params/{}", k)));
    at("/closed_form", [&] { return closed_form_count_pmf(spec.kind, spec.params, 0); });
    cfg.closed_form = spec;
  }
  if (auto it = doc.find("count_method"); it != doc.end()) {
    const std::string m = text(*it, "/count_method");
    if (m == "mixture") cfg.count_method = CountMethod::Mixture;
    else if (m == "laplace") cfg.count_method = CountMethod::Laplace;
    else if (m == "closed_form") cfg.count_method = CountMethod::ClosedForm;
    else fail("/count_method", "expected \"mixture\", \"laplace\" or \"closed_form\"");
  } else if (cfg.closed_form) {
    cfg.count_method = CountMethod::ClosedForm;
  }
  if (auto it = doc.find("convolve_n"); it != doc.end()) {
    const std::size_t n = count_value(*it, "/convolve_n");
    if (n == 0) fail("/convolve_n", "must be >= 1");
    cfg.convolve_n = static_cast<unsigned>(n);
  }
  return cfg;
}

}  // namespace

QuadratureRule ModelConfig::rule() const {
  if (!mixing) throw ConfigError("/mixing: missing required field");
  return quadrature(*mixing, nodes);
}

std::vector<ModelConfig> parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) fail("", "config must be a JSON object");
  std::vector<ModelConfig> out;
  auto panels = doc.find("panels");
  if (panels == doc.end()) {
    out.push_back(parse_single(doc));
    return out;
  }
  if (!panels->is_array() || panels->empty()) fail("/panels", "expected a nonempty array of objects");
  json base = doc;
  base.erase("panels");
  for (std::size_t k = 0; k < panels->size(); ++k) {
    const json& panel = (*panels)[k];
    if (!panel.is_object()) fail(fmt::format("/panels/{}", k), "expected an object");
    json merged = base;
    for (auto it = panel.begin(); it != panel.end(); ++it) {
      if (it->is_null()) merged.erase(it.key());
      else merged[it.key()] = *it;
    }
    try {
      out.push_back(parse_single(merged));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("panel {}: {}", k, e.what()));
    }
    if (out.back().label.empty()) out.back().label = fmt::format("panel {}", k);
  }
  return out;
}

std::vector<ModelConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mixpanjer
