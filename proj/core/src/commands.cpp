#include "mixpanjer/commands.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "mixpanjer/errors.hpp"
#include "mixpanjer/svg.hpp"

namespace mixpanjer {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxSimulatedXMax = 10000;

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  return fmt::format("{:.17g}", v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  CsvWriter(bool multi, std::initializer_list<const char*> columns) : multi_(multi) {
    if (multi_) out_ += "series,";
    bool first = true;
    for (const char* c : columns) {
      if (!first) out_ += ',';
      out_ += c;
      first = false;
    }
    out_ += '\n';
  }

  void row(const std::string& series, std::initializer_list<std::string> cells) {
    if (multi_) out_ += csv_field(series) + ',';
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out_ += ',';
      out_ += c;
      first = false;
    }
    out_ += '\n';
  }

  std::string str() const { return out_; }

 private:
  bool multi_;
  std::string out_;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(finite_or_null(x));
  return out;
}

std::string json_text(const std::string& command, json series) {
  json doc;
  doc["command"] = command;
  doc["series"] = std::move(series);
  return doc.dump(2) + "\n";
}

std::string series_label(const ModelConfig& cfg, std::size_t index) {
  return cfg.label.empty() ? fmt::format("series {}", index) : cfg.label;
}

const MixingLaw& need_mixing(const ModelConfig& cfg) {
  if (!cfg.mixing) throw ConfigError("/mixing: missing required field");
  return *cfg.mixing;
}

const CountModel& need_count(const ModelConfig& cfg) {
  if (!cfg.count) throw ConfigError("/count: missing required field");
  return *cfg.count;
}

const ClaimModel& need_integer_claims(const ModelConfig& cfg) {
  if (!cfg.claims) throw ConfigError("/claims: missing required field");
  if (const auto* m = std::get_if<ClaimModel>(&*cfg.claims)) return *m;
  throw ConfigError("/claims/family: this command needs an integer claim family");
}

// Shortest prefix holding at least 99.5% of the mass, for plotting.
std::vector<double> plot_prefix(const std::vector<double>& p) {
  double acc = 0.0;
  std::size_t end = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (acc >= 0.995) {
      end = i + 1;
      break;
    }
  }
  end = std::min(p.size(), std::max<std::size_t>(end, 11));
  return {p.begin(), p.begin() + static_cast<std::ptrdiff_t>(end)};
}

struct CountSeries {
  std::vector<double> p;
  std::vector<std::optional<double>> C;
  std::optional<std::size_t> underflow_at;
};

CountSeries count_series(const ModelConfig& cfg) {
  CountSeries s;
  switch (cfg.count_method) {
    case CountMethod::ClosedForm: {
      if (!cfg.closed_form) throw ConfigError("/closed_form: missing required field");
      s.p = closed_form_count_pmf(cfg.closed_form->kind, cfg.closed_form->params, cfg.n_max);
      break;
    }
    case CountMethod::Laplace: {
      if (cfg.count) {
        const auto* mp = std::get_if<family::MP>(&cfg.count->family());
        if (!mp || mp->xi.kind() != MapKind::Identity)
          throw ConfigError("/count: the laplace method applies to MP counts with xi = Identity");
      }
      s.p = laplace_mixed_poisson_pmf(need_mixing(cfg), cfg.n_max);
      break;
    }
    case CountMethod::Mixture: {
      CountPmfResult r = mixed_count_pmf(need_count(cfg), cfg.rule(), cfg.n_max);
      s.p = std::move(r.p);
      s.C = std::move(r.C);
      s.underflow_at = r.underflow_at;
      return s;
    }
  }
  // Direct methods: the ratio p_n / p_{n-1} is the same quantity.
  s.C.assign(s.p.size(), std::nullopt);
  for (std::size_t n = 1; n < s.p.size(); ++n)
    if (s.p[n - 1] > 0.0) s.C[n] = s.p[n] / s.p[n - 1];
  return s;
}

std::vector<double> optional_values(const std::vector<std::optional<double>>& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x ? *x : NAN);
  return out;
}

}  // namespace

std::vector<double> default_u_grid() {
  std::vector<double> u;
  for (int k = 1; k <= 80; ++k) u.push_back(0.25 * k);
  return u;
}

CommandOutput cmd_count_pmf(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg) {
  const bool multi = configs.size() > 1;
  CsvWriter csv(multi, {"n", "p_n", "C_n"});
  json series = json::array();
  std::vector<svg::BarPanel> panels;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& cfg = configs[k];
    const std::string label = series_label(cfg, k);
    const CountSeries s = count_series(cfg);
    const std::vector<double> C = optional_values(s.C);
    for (std::size_t n = 0; n < s.p.size(); ++n)
      csv.row(label, {std::to_string(n), num(s.p[n]), n == 0 ? "" : num(C[n])});
    json C_json = vector_json(C);
    if (!C_json.empty()) C_json[0] = nullptr;
    json entry = {{"label", label}, {"p", vector_json(s.p)}, {"C", C_json}};
    entry["underflow_at"] = s.underflow_at ? json(*s.underflow_at) : json(nullptr);
    series.push_back(std::move(entry));
    panels.push_back({label, plot_prefix(s.p)});
  }
  CommandOutput out;
  out.text = format == OutputFormat::Csv ? csv.str() : json_text("count-pmf", std::move(series));
  if (want_svg) out.svg = svg::bar_chart(panels, "n");
  return out;
}

CommandOutput cmd_aggregate(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg) {
  const bool multi = configs.size() > 1;
  CsvWriter csv(multi, {"x", "g", "cumulative"});
  json series = json::array();
  std::vector<svg::BarPanel> panels;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& cfg = configs[k];
    const std::string label = series_label(cfg, k);
    const CountModel& count = need_count(cfg);
    const ClaimModel& claims = need_integer_claims(cfg);
    const QuadratureRule rule = cfg.rule();
    const AggregatePmf r = cfg.x_max ? aggregate_pmf(count, claims, rule, *cfg.x_max, cfg.emit_D, false)
                                     : aggregate_pmf_auto(count, claims, rule, cfg.emit_D);
    const std::size_t x_max = r.g.size() - 1;
    const std::vector<double> cum = r.cumulative();
    for (std::size_t x = 0; x < r.g.size(); ++x) csv.row(label, {std::to_string(x), num(r.g[x]), num(cum[x])});
    json entry = {{"label", label},
                  {"x_max", x_max},
                  {"g", vector_json(r.g)},
                  {"cumulative", vector_json(cum)},
                  {"total_mass", r.total_mass()},
                  {"truncated_claim_mass", r.truncated_claim_mass}};
    if (cfg.emit_D) {
      json D = json::array();
      for (std::size_t x = 0; x < r.D.size(); ++x) {
        json row = json::array();
        for (std::size_t y = 1; y < r.D[x].size(); ++y) row.push_back(finite_or_null(r.D[x][y]));
        D.push_back(std::move(row));
      }
      entry["D"] = std::move(D);
    }
    series.push_back(std::move(entry));
    panels.push_back({label, plot_prefix(r.g)});
  }
  CommandOutput out;
  out.text = format == OutputFormat::Csv ? csv.str() : json_text("aggregate", std::move(series));
  if (want_svg) out.svg = svg::bar_chart(panels, "x");
  return out;
}

CommandOutput cmd_tail(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg) {
  const bool multi = configs.size() > 1;
  CsvWriter csv(multi, {"u", "tail"});
  json series = json::array();
  std::vector<svg::Line> lines;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& cfg = configs[k];
    const std::string label = series_label(cfg, k);
    if (!cfg.tail) throw ConfigError("/tail: missing required field");
    const QuadratureRule rule = cfg.rule();
    const std::vector<double> u = cfg.u_grid.empty() ? default_u_grid() : cfg.u_grid;
    std::vector<double> tail;
    for (double uu : u) {
      if (!(uu > 0.0)) throw ConfigError(fmt::format("/u_grid: value {} is not positive", uu));
      tail.push_back(tail_mixed_compound_geometric(cfg.tail->rho2, cfg.tail->v, rule, uu));
    }
    for (std::size_t i = 0; i < u.size(); ++i) csv.row(label, {num(u[i]), num(tail[i])});
    series.push_back({{"label", label}, {"u", vector_json(u)}, {"tail", vector_json(tail)}});
    lines.push_back({label, u, tail});
  }
  CommandOutput out;
  out.text = format == OutputFormat::Csv ? csv.str() : json_text("tail", std::move(series));
  if (want_svg) out.svg = svg::line_chart(lines, "P(S > u)", "u", "tail probability");
  return out;
}

namespace {

json moments_json(const SampleMoments& m) {
  return {{"mean", finite_or_null(m.mean)}, {"variance", finite_or_null(m.variance)}, {"mean_se", finite_or_null(m.mean_se)}};
}

json sign_json(const SignPrediction& s) { return s ? json(*s) : json(nullptr); }

}  // namespace

CommandOutput cmd_simulate(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg) {
  const bool multi = configs.size() > 1;
  CsvWriter csv(multi, {"quantity", "at", "value", "se"});
  json series = json::array();
  std::vector<svg::BarPanel> panels;
  std::vector<svg::Line> lines;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& cfg = configs[k];
    const std::string label = series_label(cfg, k);
    const CountModel& count = need_count(cfg);
    if (!cfg.claims) throw ConfigError("/claims: missing required field");
    SimulationOptions opt;
    opt.paths = cfg.paths;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    opt.u_grid = cfg.u_grid;
    if (const auto* cm = std::get_if<ClaimModel>(&*cfg.claims))
      opt.x_max = cfg.x_max ? *cfg.x_max : std::min(kMaxSimulatedXMax, auto_x_max(count, *cm, cfg.rule()));
    const SimulationReport r = simulate(count, *cfg.claims, opt);

    for (std::size_t x = 0; x < r.pmf.size(); ++x)
      csv.row(label, {"pmf", std::to_string(x), num(r.pmf[x]), num(r.pmf_se[x])});
    if (r.integer_claims) csv.row(label, {"pmf_overflow", "", num(r.overflow), ""});
    for (std::size_t i = 0; i < r.u_grid.size(); ++i)
      csv.row(label, {"tail", num(r.u_grid[i]), num(r.tail[i]), num(r.tail_se[i])});
    const std::pair<const char*, const SampleMoments*> moments[] = {
        {"theta", &r.theta}, {"N", &r.n}, {"X1", &r.x1}, {"S", &r.s}};
    for (const auto& [name, m] : moments) {
      csv.row(label, {fmt::format("mean_{}", name), "", num(m->mean), num(m->mean_se)});
      csv.row(label, {fmt::format("variance_{}", name), "", num(m->variance), ""});
    }
    const std::pair<const char*, const CorrelationEstimate*> corrs[] = {
        {"corr_N_X1", &r.corr_n_x1}, {"corr_X1_X2", &r.corr_x1_x2}, {"corr_N_Theta", &r.corr_n_theta}};
    for (const auto& [name, c] : corrs) csv.row(label, {name, "", num(c->value), num(c->se)});

    json entry = {{"label", label},
                  {"seed", r.seed},
                  {"paths", r.paths},
                  {"batches", r.batches},
                  {"integer_claims", r.integer_claims}};
    if (r.integer_claims) {
      entry["pmf"] = vector_json(r.pmf);
      entry["pmf_se"] = vector_json(r.pmf_se);
      entry["overflow"] = r.overflow;
    }
    entry["u"] = vector_json(r.u_grid);
    entry["tail"] = vector_json(r.tail);
    entry["tail_se"] = vector_json(r.tail_se);
    entry["moments"] = {{"theta", moments_json(r.theta)},
                        {"N", moments_json(r.n)},
                        {"X1", moments_json(r.x1)},
                        {"S", moments_json(r.s)}};
    json corr = json::object();
    for (const auto& [name, c] : corrs) corr[name] = {{"value", finite_or_null(c->value)}, {"se", finite_or_null(c->se)}};
    entry["correlations"] = std::move(corr);
    entry["predicted_signs"] = {{"corr_N_X1", sign_json(r.predictions.n_x1)},
                                {"corr_X1_X2", sign_json(r.predictions.x1_x2)},
                                {"corr_N_Theta", sign_json(r.predictions.n_theta)}};
    if (r.paths >= kMinCorrelationPaths) {
      json checks = json::array();
      for (const auto& t : correlation_checks(r))
        checks.push_back({{"name", t.name},
                          {"predicted", sign_json(t.predicted)},
                          {"estimate", finite_or_null(t.estimate)},
                          {"se", finite_or_null(t.se)},
                          {"passed", t.passed}});
      entry["sign_tests"] = std::move(checks);
    } else {
      entry["sign_tests"] = nullptr;
    }
    series.push_back(std::move(entry));
    if (r.integer_claims) panels.push_back({label, plot_prefix(r.pmf)});
    if (!r.u_grid.empty()) lines.push_back({label, r.u_grid, r.tail});
  }
  CommandOutput out;
  out.text = format == OutputFormat::Csv ? csv.str() : json_text("simulate", std::move(series));
  if (want_svg)
    out.svg = panels.empty() ? svg::line_chart(lines, "empirical P(S > u)", "u", "tail probability")
                             : svg::bar_chart(panels, "x");
  return out;
}

CommandOutput cmd_thin(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg) {
  const bool multi = configs.size() > 1;
  CsvWriter csv(multi, {"n", "p_n"});
  json series = json::array();
  std::vector<svg::BarPanel> panels;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& cfg = configs[k];
    const std::string label = series_label(cfg, k);
    const CountModel& count = need_count(cfg);
    if (!cfg.thin_v) throw ConfigError("/thin: missing required field");
    const QuadratureRule rule = cfg.rule();
    const AbMaps maps = thin(ab_maps(count), *cfg.thin_v);
    std::vector<double> a_tilde, b_tilde;
    for (double t : rule.nodes) {
      a_tilde.push_back(maps.a(t));
      b_tilde.push_back(maps.b(t));
    }
    const CountPmfResult r = thinned_count_pmf(count, *cfg.thin_v, rule, cfg.n_max);
    for (std::size_t n = 0; n < r.p.size(); ++n) csv.row(label, {std::to_string(n), num(r.p[n])});
    series.push_back({{"label", label},
                      {"nodes", vector_json(rule.nodes)},
                      {"weights", vector_json(rule.weights)},
                      {"a_tilde", vector_json(a_tilde)},
                      {"b_tilde", vector_json(b_tilde)},
                      {"p", vector_json(r.p)}});
    panels.push_back({label, plot_prefix(r.p)});
  }
  CommandOutput out;
  out.text = format == OutputFormat::Csv ? csv.str() : json_text("thin", std::move(series));
  if (want_svg) out.svg = svg::bar_chart(panels, "n");
  return out;
}

CommandOutput cmd_convolve(const std::vector<ModelConfig>& configs, OutputFormat format, bool want_svg) {
  const bool multi = configs.size() > 1;
  CsvWriter csv(multi, {"x", "P"});
  json series = json::array();
  std::vector<svg::BarPanel> panels;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto& cfg = configs[k];
    const std::string label = series_label(cfg, k);
    const ClaimModel& claims = need_integer_claims(cfg);
    const std::size_t x_max = cfg.x_max ? *cfg.x_max : 30;
    const std::vector<double> P = mixed_convolution(claims, cfg.rule(), cfg.convolve_n, x_max);
    for (std::size_t x = 0; x < P.size(); ++x) csv.row(label, {std::to_string(x), num(P[x])});
    series.push_back({{"label", label}, {"n", cfg.convolve_n}, {"P", vector_json(P)}});
    panels.push_back({label, plot_prefix(P)});
  }
  CommandOutput out;
  out.text = format == OutputFormat::Csv ? csv.str() : json_text("convolve", std::move(series));
  if (want_svg) out.svg = svg::bar_chart(panels, "x");
  return out;
}

}  // namespace mixpanjer
