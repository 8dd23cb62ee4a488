#include "sfcsim/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace sfc {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) bad(where + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(where + "." + key + ": " + e.what());
  }
}

json circle_nodes(int n, double radius_km) {
  auto [nodes, edges] = circle_topology(n, radius_km, 0.0, 0);
  json out = json::array();
  for (const auto& p : nodes) out.push_back({{"id", p.id}, {"x_km", p.x_km}, {"y_km", p.y_km}});
  return out;
}

json edge_list(const std::vector<std::pair<int, int>>& pairs) {
  json out = json::array();
  for (auto [a, b] : pairs) out.push_back({{"a", a}, {"b", b}, {"capacity_mbps", 500}});
  return out;
}

}  // namespace

json default_scenario_json() {
  json j;
  j["name"] = "custom";
  j["catalog"] = json::object();  // partial overrides of the default catalog
  j["datacenters"] = {{"max_storage_gb", 2000}, {"cpus", 64}, {"ram_gb", 256}, {"per_dc", json::array()}};
  j["waves"] = json::array({0});
  j["allow_loopback"] = false;
  j["engine"] = {{"t_thresh", 500}, {"propagation", true}, {"fiber_km_per_s", kFiberKmPerSecond}};
  j["priority"] = {{"weights", {1.0, 1.0, 1.0, 1.0}}, {"urgency_fraction", 0.2}};
  j["t_model"] = 1;
  j["sample_period"] = 1500;
  j["step_cap"] = 2'000'000;
  j["drain"] = true;
  j["policy"] = "heuristic";
  j["dqn"] = dqn_config_to_json(DqnConfig{});
  j["reward"] = reward_to_json(RewardSpec{});
  j["train_episodes"] = 2000;
  j["seed"] = 1;
  j["output_dir"] = "";
  return j;
}

std::vector<std::string> builtin_scenario_names() { return {"paper5dc", "paper3dc", "tiny"}; }

json builtin_scenario_json(const std::string& name) {
  json j = default_scenario_json();
  j["name"] = name;
  if (name == "paper5dc") {
    j["topology"] = {{"nodes", circle_nodes(5, 100.0)},
                     {"edges", edge_list({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {0, 2}, {1, 3}})}};
    j["waves"] = {0, 2500, 5000, 7500};
  } else if (name == "paper3dc") {
    j["topology"] = {{"nodes", circle_nodes(3, 100.0)}, {"edges", edge_list({{0, 1}, {1, 2}, {0, 2}})}};
    j["waves"] = {0, 2500, 5000, 7500};
  } else if (name == "tiny") {
    j["topology"] = {{"nodes", circle_nodes(2, 25.0)}, {"edges", edge_list({{0, 1}})}};
    j["waves"] = json::array({{{"at", 0}, {"requests", json::array({{{"type", "Ind4.0"}, {"src", 0}, {"dest", 1}}})}}});
    j["policy"] = "dqn";
    j["train_episodes"] = 200;
  } else {
    std::string known;
    for (const auto& n : builtin_scenario_names()) known += (known.empty() ? "" : ", ") + n;
    bad("unknown scenario \"" + name + "\" (builtins: " + known + ")");
  }
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad("override \"" + assignment + "\" is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) bad("override key \"" + key + "\" has an empty component");
    if (!node->is_object()) bad("override key \"" + key + "\": \"" + part + "\" is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t training_seed(std::uint64_t seed, std::int64_t episode) {
  return seed * 1'000'003ULL + 1'000'000ULL + static_cast<std::uint64_t>(episode);
}

namespace {

std::vector<NodeSpec> parse_nodes(const json& t) {
  if (!t.contains("nodes") || !t["nodes"].is_array() || t["nodes"].empty()) bad("topology.nodes must be a non-empty list");
  std::vector<NodeSpec> nodes;
  for (const auto& n : t["nodes"])
    nodes.push_back({get<int>(n, "id", "topology.nodes[]"), get<double>(n, "x_km", "topology.nodes[]"),
                     get<double>(n, "y_km", "topology.nodes[]")});
  return nodes;
}

std::vector<EdgeSpec> parse_edges(const json& t) {
  if (!t.contains("edges") || !t["edges"].is_array()) bad("topology.edges must be a list");
  std::vector<EdgeSpec> edges;
  for (const auto& e : t["edges"]) {
    EdgeSpec s;
    s.a = get<int>(e, "a", "topology.edges[]");
    s.b = get<int>(e, "b", "topology.edges[]");
    const double cap = e.contains("capacity_mbps") ? get<double>(e, "capacity_mbps", "topology.edges[]") : 500.0;
    if (!(cap >= 0.0)) bad("topology.edges[].capacity_mbps must be >= 0");
    s.capacity = mbps_to_kbps(cap);
    if (e.contains("length_km") && !e["length_km"].is_null()) s.length_km = get<double>(e, "length_km", "topology.edges[]");
    edges.push_back(s);
  }
  return edges;
}

std::vector<WaveSpec> parse_waves(const json& w) {
  if (!w.is_array()) bad("waves must be a list of step times or {\"at\", \"requests\"} objects");
  std::vector<WaveSpec> waves;
  for (const auto& item : w) {
    WaveSpec s;
    if (item.is_number_integer()) {
      s.at = item.get<Steps>();
    } else if (item.is_object()) {
      s.at = get<Steps>(item, "at", "waves[]");
      if (item.contains("requests")) {
        for (const auto& r : item["requests"]) {
          ManualRequest m;
          try {
            m.type = parse_sfc_kind(get<std::string>(r, "type", "waves[].requests[]"));
          } catch (const std::invalid_argument& e) {
            bad(std::string("waves[].requests[].type: ") + e.what());
          }
          m.src = get<int>(r, "src", "waves[].requests[]");
          m.dest = get<int>(r, "dest", "waves[].requests[]");
          if (r.contains("bw_mbps")) m.bw_mbps = get<double>(r, "bw_mbps", "waves[].requests[]");
          s.manual.push_back(m);
        }
        if (s.manual.empty()) bad("waves[].requests must not be empty");
      }
    } else {
      bad("waves entries must be integers or objects");
    }
    if (s.at < 0) bad("wave times must be >= 0");
    waves.push_back(std::move(s));
  }
  for (std::size_t i = 1; i < waves.size(); ++i)
    if (waves[i].at <= waves[i - 1].at) bad("wave times must be strictly ascending without duplicates");
  return waves;
}

DcSpec parse_dc(const json& j, const DcSpec& base, const std::string& where) {
  DcSpec d = base;
  if (j.contains("max_storage_gb")) d.max_storage_gb = get<int>(j, "max_storage_gb", where);
  if (j.contains("cpus")) d.cpus = get<int>(j, "cpus", where);
  if (j.contains("ram_gb")) d.ram_gb = get<int>(j, "ram_gb", where);
  if (d.max_storage_gb < 0 || d.cpus < 0 || d.ram_gb < 0) bad(where + ": capacities must be >= 0");
  return d;
}

ScenarioConfig resolve(json j) {
  ScenarioConfig c;
  if (!j.contains("topology") || j["topology"].is_null()) bad("topology required: give topology.nodes and topology.edges");

  // Fill missing keys from the defaults so the canonical form is complete.
  json full = default_scenario_json();
  full.merge_patch(j);
  for (const char* k : {"dqn", "reward", "engine", "priority", "datacenters"}) {
    json merged = default_scenario_json()[k];
    merged.merge_patch(j.contains(k) ? j[k] : json::object());
    full[k] = merged;
  }
  json catalog_json = to_json(default_catalog());
  catalog_json.merge_patch(full["catalog"]);
  full["catalog"] = catalog_json;

  try {
    c.episode.catalog = std::make_shared<const Catalog>(load_catalog(full["catalog"]));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    bad(std::string("catalog: ") + e.what());
  }

  c.name = get<std::string>(full, "name", "scenario");
  c.policy = get<std::string>(full, "policy", "scenario");
  if (c.policy != "heuristic" && c.policy != "random" && c.policy != "dqn")
    bad("policy must be one of heuristic, random, dqn (got \"" + c.policy + "\")");

  c.episode.nodes = parse_nodes(full["topology"]);
  c.episode.edges = parse_edges(full["topology"]);
  try {
    NetworkGraph probe(c.episode.nodes, c.episode.edges);
  } catch (const std::exception& e) {
    bad(std::string("topology: ") + e.what());
  }
  if (c.episode.nodes.size() > 64) bad("topology: at most 64 DCs are supported");

  const auto& dcj = full["datacenters"];
  const DcSpec base = parse_dc(dcj, DcSpec{}, "datacenters");
  c.episode.dcs.assign(c.episode.nodes.size(), base);
  if (dcj.contains("per_dc")) {
    const auto& per = dcj["per_dc"];
    if (!per.is_array()) bad("datacenters.per_dc must be a list");
    if (!per.empty() && per.size() != c.episode.nodes.size())
      bad("datacenters.per_dc must be empty or list one entry per topology node");
    for (std::size_t i = 0; i < per.size(); ++i) c.episode.dcs[i] = parse_dc(per[i], base, "datacenters.per_dc[]");
  }

  c.episode.waves = parse_waves(full["waves"]);
  for (const auto& w : c.episode.waves)
    for (const auto& m : w.manual)
      if (m.src < 0 || m.dest < 0 || m.src >= static_cast<int>(c.episode.nodes.size()) ||
          m.dest >= static_cast<int>(c.episode.nodes.size()))
        bad("waves[].requests[]: src/dest must be topology node ids");

  c.episode.allow_loopback = get<bool>(full, "allow_loopback", "scenario");
  if (!c.episode.allow_loopback && c.episode.nodes.size() < 2 && !c.episode.waves.empty())
    bad("at least two DCs are needed unless allow_loopback is true");
  const auto& ej = full["engine"];
  c.episode.engine.t_thresh = get<Steps>(ej, "t_thresh", "engine");
  c.episode.engine.propagation = get<bool>(ej, "propagation", "engine");
  c.episode.engine.fiber_km_per_s = get<double>(ej, "fiber_km_per_s", "engine");
  if (c.episode.engine.t_thresh < 1) bad("engine.t_thresh must be >= 1");
  if (!(c.episode.engine.fiber_km_per_s > 0.0)) bad("engine.fiber_km_per_s must be positive");

  const auto& pj = full["priority"];
  const auto w = get<std::vector<double>>(pj, "weights", "priority");
  if (w.size() != 4) bad("priority.weights must have exactly 4 entries");
  std::copy(w.begin(), w.end(), c.episode.priority.weights.begin());
  c.episode.priority.urgency_fraction = get<double>(pj, "urgency_fraction", "priority");
  if (!(c.episode.priority.urgency_fraction >= 0.0 && c.episode.priority.urgency_fraction <= 1.0))
    bad("priority.urgency_fraction must be in [0, 1]");

  c.episode.t_model = get<Steps>(full, "t_model", "scenario");
  c.episode.sample_period = get<Steps>(full, "sample_period", "scenario");
  c.episode.step_cap = get<Steps>(full, "step_cap", "scenario");
  c.episode.drain = get<bool>(full, "drain", "scenario");
  if (c.episode.t_model < 1) bad("t_model must be >= 1");
  if (c.episode.sample_period < 1) bad("sample_period must be >= 1");
  if (c.episode.step_cap < 1) bad("step_cap must be >= 1");
  c.episode.seed = get<std::uint64_t>(full, "seed", "scenario");

  try {
    c.dqn = dqn_config_from_json(full["dqn"]);
    c.reward = reward_from_json(full["reward"]);
  } catch (const json::exception& e) {
    bad(std::string("dqn/reward: ") + e.what());
  }
  c.dqn.validate();
  c.reward.validate();
  c.train_episodes = get<std::int64_t>(full, "train_episodes", "scenario");
  if (c.train_episodes < 0) bad("train_episodes must be >= 0");
  c.output_dir = get<std::string>(full, "output_dir", "scenario");

  // Unknown top-level keys are almost always typos.
  const json defaults = default_scenario_json();
  for (const auto& [k, v] : full.items())
    if (!defaults.contains(k) && k != "topology") bad("unknown configuration key \"" + k + "\"");

  json hashed = full;
  hashed.erase("seed");
  hashed.erase("output_dir");
  c.hash = fnv1a64_hex(hashed.dump());
  c.resolved = std::move(full);
  return c;
}

}  // namespace

ScenarioConfig load_scenario(const json& user, const std::vector<std::string>& overrides) {
  if (!user.is_object()) bad("configuration must be a JSON object");
  json doc;
  json layer = user;
  if (layer.contains("base")) {
    doc = builtin_scenario_json(get<std::string>(layer, "base", "scenario"));
    layer.erase("base");
  } else {
    doc = default_scenario_json();
  }
  // Arrays and scalars replace; objects merge key by key.
  doc.merge_patch(layer);
  for (const auto& o : overrides) apply_override(doc, o);
  return resolve(std::move(doc));
}

ScenarioConfig load_builtin(const std::string& name, const std::vector<std::string>& overrides) {
  return load_scenario(json{{"base", name}}, overrides);
}

ScenarioConfig load_scenario_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    bad("config file " + path + " is not valid JSON: " + e.what());
  }
  return load_scenario(j, overrides);
}

}  // namespace sfc
