#include "ppd/prior_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "ppd/csv.hpp"

namespace ppd {

namespace {

using nlohmann::json;

Grid parse_grid(const json& j, const std::string& name) {
  if (!j.is_object()) throw std::invalid_argument("grid '" + name + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "lo" && key != "hi" && key != "count") {
      throw std::invalid_argument("grid '" + name + "' has unknown key '" + key + "'");
    }
  }
  Grid g;
  g.lo = j.at("lo").get<double>();
  g.hi = j.value("hi", g.lo);
  g.count = j.value("count", std::size_t{1});
  if (g.count == 0) throw std::invalid_argument("grid '" + name + "' must have count >= 1");
  if (g.count > 1 && !(g.hi > g.lo)) {
    throw std::invalid_argument("grid '" + name + "' needs hi > lo");
  }
  return g;
}

json grid_to_json(const Grid& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"count", g.count}}; }

const std::set<std::string>& allowed_grids(const std::string& family) {
  static const std::set<std::string> step{"dx", "dy", "h"};
  static const std::set<std::string> sine{"dx"};
  static const std::set<std::string> line{"dy", "m"};
  static const std::set<std::string> mix{"sine_dx", "line_dy", "line_m"};
  static const std::set<std::string> none;
  if (family == "step" || family == "step-extended") return step;
  if (family == "sine") return sine;
  if (family == "line") return line;
  if (family == "sine+line") return mix;
  return none;
}

}  // namespace

PriorSpec parse_prior_spec(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("prior config must be a JSON object");
  static const std::set<std::string> keys{"family",          "noise_sigma", "grids",
                                          "mixture_weights", "dedupe_sine", "latents_csv",
                                          "latents"};
  for (const auto& [key, _] : j.items()) {
    if (!keys.contains(key)) throw std::invalid_argument("unknown prior config key '" + key + "'");
  }

  PriorSpec spec;
  spec.family = j.value("family", std::string("step"));
  spec.noise_sigma = j.value("noise_sigma", 0.1);
  spec.dedupe_sine = j.value("dedupe_sine", false);
  if (!(spec.noise_sigma > 0.0)) throw std::invalid_argument("noise_sigma must be positive");

  if (j.contains("grids")) {
    const auto& allowed = allowed_grids(spec.family);
    for (const auto& [name, value] : j.at("grids").items()) {
      if (!allowed.contains(name)) {
        throw std::invalid_argument("grid '" + name + "' does not apply to family '" +
                                    spec.family + "'");
      }
      const Grid g = parse_grid(value, name);
      if (spec.family == "sine+line") {
        if (name == "sine_dx") spec.sine_dx = g;
        if (name == "line_dy") spec.line_dy = g;
        if (name == "line_m") spec.line_m = g;
      } else if (spec.family == "sine") {
        spec.sine_dx = g;
      } else if (spec.family == "line") {
        (name == "dy" ? spec.line_dy : spec.line_m) = g;
      } else {
        (name == "dx" ? spec.step_dx : name == "dy" ? spec.step_dy : spec.step_h) = g;
      }
    }
  }

  if (j.contains("mixture_weights")) {
    const auto& w = j.at("mixture_weights");
    spec.sine_class_weight = w.value("sine", 0.5);
    spec.line_class_weight = w.value("line", 0.5);
  }

  if (j.contains("latents_csv")) {
    std::filesystem::path p = j.at("latents_csv").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    LatentTable table = read_latents_csv(p);
    spec.custom_latents = std::move(table.latents);
    spec.custom_log_prior = std::move(table.log_prior);
  }
  if (j.contains("latents")) {
    for (const auto& row : j.at("latents")) {
      const Family f = parse_family(row.at("family").get<std::string>());
      const auto params = row.at("params").get<std::vector<double>>();
      FunctionLatent l{f, {}};
      if (params.size() != l.param_count()) {
        throw std::invalid_argument("latent of family '" + std::string(family_name(f)) +
                                    "' needs " + std::to_string(l.param_count()) + " params");
      }
      std::copy(params.begin(), params.end(), l.params.begin());
      spec.custom_latents.push_back(l);
    }
  }
  if (spec.family == "custom" && spec.custom_latents.empty()) {
    throw std::invalid_argument("custom prior needs 'latents_csv' or 'latents'");
  }
  return spec;
}

json prior_spec_to_json(const PriorSpec& spec) {
  json j{{"family", spec.family}, {"noise_sigma", spec.noise_sigma}};
  json grids = json::object();
  auto put = [&](const char* name, const std::optional<Grid>& g) {
    if (g) grids[name] = grid_to_json(*g);
  };
  if (spec.family == "sine+line") {
    put("sine_dx", spec.sine_dx);
    put("line_dy", spec.line_dy);
    put("line_m", spec.line_m);
    j["mixture_weights"] = {{"sine", spec.sine_class_weight}, {"line", spec.line_class_weight}};
  } else if (spec.family == "sine") {
    put("dx", spec.sine_dx);
  } else if (spec.family == "line") {
    put("dy", spec.line_dy);
    put("m", spec.line_m);
  } else {
    put("dx", spec.step_dx);
    put("dy", spec.step_dy);
    put("h", spec.step_h);
  }
  if (!grids.empty()) j["grids"] = grids;
  if (spec.dedupe_sine) j["dedupe_sine"] = true;
  if (!spec.custom_latents.empty()) {
    json rows = json::array();
    for (const auto& l : spec.custom_latents) {
      rows.push_back({{"family", family_name(l.family)},
                      {"params", std::vector<double>(l.params.begin(),
                                                     l.params.begin() + l.param_count())}});
    }
    j["latents"] = rows;
  }
  return j;
}

LatentTable read_latents_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("latent CSV is empty");
  const auto header = split_csv_line(line);
  const bool has_prior = header.size() == 5 && header[4] == "log_prior";
  if (header.size() < 4 || header[0] != "family" || header[1] != "param1" ||
      header[2] != "param2" || header[3] != "param3" || (header.size() == 5 && !has_prior) ||
      header.size() > 5) {
    throw std::invalid_argument("latent CSV header must be family,param1,param2,param3[,log_prior]");
  }

  LatentTable table;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("latent CSV row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " cells");
    }
    FunctionLatent l{parse_family(cells[0]), {}};
    for (std::size_t p = 0; p < l.param_count(); ++p) {
      if (cells[p + 1].empty()) {
        throw std::invalid_argument("latent CSV row " + std::to_string(row) + " misses param" +
                                    std::to_string(p + 1));
      }
      l.params[p] = std::stod(cells[p + 1]);
    }
    table.latents.push_back(l);
    if (has_prior) table.log_prior.push_back(std::stod(cells[4]));
  }
  if (table.latents.empty()) throw std::invalid_argument("latent CSV has no rows");
  return table;
}

LatentTable read_latents_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open latent CSV " + path.string());
  return read_latents_csv(in);
}

}  // namespace ppd
