#include <fstream>
#include <set>
#include <stdexcept>

#include "balldiv/harness.hpp"
#include "json.hpp"

namespace balldiv {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

std::vector<int> desk_dims(int max_pow2) {
  // Every other power of two up to the scenario's grid limit.
  std::vector<int> dims;
  for (int k = 1; k <= max_pow2; k += 2) dims.push_back(1 << k);
  return dims;
}

}  // namespace

StudyConfig default_config(const std::string& preset, const std::string& study) {
  if (preset != "desk" && preset != "full")
    throw std::invalid_argument("config: preset must be 'desk' or 'full'");
  if (study != "power" && study != "level")
    throw std::invalid_argument("config: study must be 'power' or 'level'");
  StudyConfig config;
  config.study = study;
  config.reps = preset == "desk" ? 200 : 500;
  config.B = 500;
  config.kinds = {DistanceKind::L2, DistanceKind::L1, DistanceKind::Exp, DistanceKind::Log};
  const bool desk = preset == "desk";
  auto add = [&](const std::string& id) {
    const ScenarioTemplate& tpl = find_scenario(id);
    ScenarioSelection sel;
    sel.id = id;
    sel.dims = desk ? desk_dims(tpl.max_pow2) : tpl.full_grid();
    config.scenarios.push_back(std::move(sel));
  };
  if (study == "level") {
    add("level");
  } else {
    for (int k = 1; k <= 14; ++k) add("ex" + std::to_string(k));
  }
  return config;
}

StudyConfig config_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + err.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config: document must be a JSON object");
  reject_unknown_keys(doc,
                      {"version", "study", "alpha", "reps", "B", "masterSeed", "threads",
                       "timing", "kinds", "scenarios", "out"},
                      "the top level");
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw std::invalid_argument("config: missing integer 'version'");

  StudyConfig config;
  config.version = doc["version"].get<int>();
  if (config.version != kConfigVersion)
    throw std::invalid_argument("config: unsupported version " + std::to_string(config.version) +
                                " (expected " + std::to_string(kConfigVersion) + ")");
  if (doc.contains("study")) config.study = doc["study"].get<std::string>();
  if (doc.contains("alpha")) config.alpha = doc["alpha"].get<double>();
  if (doc.contains("reps")) config.reps = doc["reps"].get<int>();
  if (doc.contains("B")) config.B = doc["B"].get<int>();
  if (doc.contains("masterSeed")) config.master_seed = doc["masterSeed"].get<std::uint64_t>();
  if (doc.contains("threads")) config.threads = doc["threads"].get<int>();
  if (doc.contains("timing")) config.timing = doc["timing"].get<bool>();
  if (doc.contains("out")) config.out_dir = doc["out"].get<std::string>();

  config.kinds.clear();
  if (doc.contains("kinds")) {
    if (!doc["kinds"].is_array()) throw std::invalid_argument("config: 'kinds' must be an array");
    for (const auto& k : doc["kinds"])
      config.kinds.push_back(distance_spec_from_name(k.get<std::string>()).kind);
  } else {
    config.kinds = {DistanceKind::L2, DistanceKind::L1, DistanceKind::Exp, DistanceKind::Log};
  }

  if (!doc.contains("scenarios") || !doc["scenarios"].is_array() || doc["scenarios"].empty())
    throw std::invalid_argument("config: 'scenarios' must be a non-empty array");
  for (const auto& s : doc["scenarios"]) {
    if (!s.is_object()) throw std::invalid_argument("config: each scenario must be an object");
    reject_unknown_keys(s, {"id", "dims", "beta", "gamma"}, "a scenario entry");
    ScenarioSelection sel;
    if (!s.contains("id")) throw std::invalid_argument("config: scenario entry without 'id'");
    sel.id = s["id"].get<std::string>();
    if (!s.contains("dims") || !s["dims"].is_array() || s["dims"].empty())
      throw std::invalid_argument("config: scenario '" + sel.id +
                                  "' needs a non-empty 'dims' array");
    for (const auto& d : s["dims"]) sel.dims.push_back(d.get<int>());
    if (s.contains("beta") || s.contains("gamma")) {
      if (!s.contains("beta") || !s.contains("gamma"))
        throw std::invalid_argument("config: scenario '" + sel.id +
                                    "' must set beta and gamma together");
      sel.beta = s["beta"].get<double>();
      sel.gamma = s["gamma"].get<double>();
      sel.has_beta_gamma = true;
    }
    config.scenarios.push_back(std::move(sel));
  }
  return config;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

std::string config_to_json(const StudyConfig& config) {
  json doc;
  doc["version"] = config.version;
  doc["study"] = config.study;
  doc["alpha"] = config.alpha;
  doc["reps"] = config.reps;
  doc["B"] = config.B;
  doc["masterSeed"] = config.master_seed;
  doc["threads"] = config.threads;
  doc["timing"] = config.timing;
  doc["out"] = config.out_dir;
  doc["kinds"] = json::array();
  for (const DistanceKind kind : config.kinds) {
    DistanceSpec spec;
    spec.kind = kind;
    doc["kinds"].push_back(spec.name());
  }
  doc["scenarios"] = json::array();
  for (const auto& sel : config.scenarios) {
    json s;
    s["id"] = sel.id;
    s["dims"] = sel.dims;
    if (sel.has_beta_gamma) {
      s["beta"] = sel.beta;
      s["gamma"] = sel.gamma;
    }
    doc["scenarios"].push_back(std::move(s));
  }
  return doc.dump(2) + "\n";
}

void save_config(const StudyConfig& config, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("config: cannot write '" + path + "'");
  file << config_to_json(config);
}

}  // namespace balldiv
