#include "fedgate/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedgate/error.hpp"

namespace fedgate::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, "config key '" + key + "': " + what);
}

const json* child(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string req_string(const json& obj, const char* key, const std::string& path) {
  const json* v = child(obj, key);
  if (v == nullptr || !v->is_string()) {
    bad(path + "." + key, "expected a string");
  }
  return v->get<std::string>();
}

std::string opt_string(const json& obj, const char* key, const std::string& path,
                       std::string fallback) {
  const json* v = child(obj, key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_string()) {
    bad(path + "." + key, "expected a string");
  }
  return v->get<std::string>();
}

std::uint64_t req_uint(const json& obj, const char* key, const std::string& path) {
  const json* v = child(obj, key);
  if (v == nullptr || !v->is_number_unsigned()) {
    if (v != nullptr && v->is_number_integer() && v->get<std::int64_t>() >= 0) {
      return v->get<std::uint64_t>();
    }
    bad(path + "." + key, "expected a non-negative integer");
  }
  return v->get<std::uint64_t>();
}

std::uint64_t opt_uint(const json& obj, const char* key, const std::string& path,
                       std::uint64_t fallback) {
  return child(obj, key) == nullptr ? fallback : req_uint(obj, key, path);
}

double opt_number(const json& obj, const char* key, const std::string& path,
                  double fallback) {
  const json* v = child(obj, key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_number()) {
    bad(path + "." + key, "expected a number");
  }
  return v->get<double>();
}

const json& req_array(const json& obj, const char* key) {
  static const json kEmpty = json::array();
  const json* v = child(obj, key);
  if (v == nullptr) {
    return kEmpty;
  }
  if (!v->is_array()) {
    bad(key, "expected an array");
  }
  return *v;
}

std::set<std::string> string_set(const json& obj, const char* key,
                                 const std::string& path) {
  std::set<std::string> out;
  const json* v = child(obj, key);
  if (v == nullptr) {
    return out;
  }
  if (!v->is_array()) {
    bad(path + "." + key, "expected an array of strings");
  }
  for (const auto& s : *v) {
    if (!s.is_string()) {
      bad(path + "." + key, "expected an array of strings");
    }
    out.insert(s.get<std::string>());
  }
  return out;
}

std::string at(const char* key, std::size_t i) {
  return std::string(key) + "[" + std::to_string(i) + "]";
}

} // namespace

cluster::ClusterDescriptor descriptor_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) {
      bad("cluster", "expected an object");
    }
    cluster::ClusterDescriptor d;
    d.id = req_string(j, "id", "cluster");
    d.zone = req_string(j, "zone", "cluster");
    d.endpoint = opt_string(j, "endpoint", "cluster", "sim://" + d.id);
    d.catalogs = string_set(j, "catalogs", "cluster");
    if (d.catalogs.empty()) {
      d.catalogs = {"hive"};
    }
    const auto workers = req_uint(j, "worker_count", "cluster");
    if (workers > 1'000'000) {
      bad("cluster.worker_count", "too large");
    }
    d.worker_count = static_cast<int>(workers);
    d.memory_per_worker_bytes = req_uint(j, "memory_per_worker_bytes", "cluster");
    cluster::validate(d);
    return d;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidDescriptor) {
      throw;
    }
    throw Error(ErrorCode::kInvalidDescriptor, e.what());
  }
}

nlohmann::json to_json(const cluster::ClusterDescriptor& d) {
  return {{"id", d.id},
          {"zone", d.zone},
          {"endpoint", d.endpoint},
          {"catalogs", d.catalogs},
          {"worker_count", d.worker_count},
          {"memory_per_worker_bytes", d.memory_per_worker_bytes}};
}

GatewayConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    bad("<root>", "expected an object");
  }
  GatewayConfig c;
  const auto& zones = req_array(doc, "zones");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const auto path = at("zones", i);
    auto kind = storage::zone_kind_from_string(req_string(zones[i], "kind", path));
    if (!kind) {
      bad(path + ".kind", "expected onprem or cloud");
    }
    c.zones.push_back({req_string(zones[i], "name", path), *kind});
  }
  const auto& clusters = req_array(doc, "clusters");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    try {
      c.clusters.push_back(descriptor_from_json(clusters[i]));
    } catch (const Error& e) {
      bad(at("clusters", i), e.what());
    }
  }
  const auto& mounts = req_array(doc, "mounts");
  for (std::size_t i = 0; i < mounts.size(); ++i) {
    const auto path = at("mounts", i);
    c.mounts.push_back({req_string(mounts[i], "physical_prefix", path),
                        req_string(mounts[i], "unified_prefix", path),
                        req_string(mounts[i], "zone", path)});
  }
  const auto& rules = req_array(doc, "regex_rules");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto path = at("regex_rules", i);
    c.regex_rules.push_back({req_string(rules[i], "pattern", path),
                             req_string(rules[i], "unified_template", path),
                             req_string(rules[i], "zone", path)});
  }
  const auto& datasets = req_array(doc, "datasets");
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto path = at("datasets", i);
    DatasetConfig d;
    d.name = req_string(datasets[i], "name", path);
    d.size_bytes = opt_uint(datasets[i], "size_bytes", path, 0);
    const json* reps = child(datasets[i], "replicas");
    if (reps == nullptr || !reps->is_array() || reps->empty()) {
      bad(path + ".replicas", "expected a non-empty array");
    }
    for (std::size_t k = 0; k < reps->size(); ++k) {
      const auto rpath = path + at(".replicas", k);
      d.replicas.push_back({req_string((*reps)[k], "zone", rpath),
                            req_string((*reps)[k], "uri", rpath)});
    }
    c.datasets.push_back(std::move(d));
  }

  auto kind = routing::policy_kind_from_string(
      opt_string(doc, "policy", "", "ROUND_ROBIN"));
  if (!kind) {
    bad("policy", "expected ROUND_ROBIN, RANDOM, LEAST_LOADED or COST_BASED");
  }
  c.policy.kind = *kind;
  c.policy.heavy_cluster_ids = string_set(doc, "heavy_cluster_ids", "");
  c.seed = opt_uint(doc, "seed", "", 0);
  c.policy.seed = c.seed;
  c.policy.heavy_threshold_bytes = opt_uint(doc, "heavy_threshold_bytes", "",
                                            cost::kDefaultHeavyThresholdBytes);

  if (const json* probe = child(doc, "probe")) {
    if (!probe->is_object()) {
      bad("probe", "expected an object");
    }
    const double interval = opt_number(*probe, "interval_s", "probe", 1.0);
    if (!(interval > 0.0)) {
      bad("probe.interval_s", "must be positive");
    }
    c.probe.interval = Seconds(interval);
    const auto threshold = opt_uint(*probe, "failure_threshold", "probe", 3);
    if (threshold == 0 || threshold > 1000) {
      bad("probe.failure_threshold", "must be in [1, 1000]");
    }
    c.probe.failure_threshold = static_cast<int>(threshold);
  }

  if (const json* w = child(doc, "workload")) {
    if (!w->is_object()) {
      bad("workload", "expected an object");
    }
    if (const json* bands = child(*w, "bands")) {
      if (!bands->is_array()) {
        bad("workload.bands", "expected an array");
      }
      c.mixture.bands.clear();
      for (std::size_t i = 0; i < bands->size(); ++i) {
        const auto path = "workload." + at("bands", i);
        c.mixture.bands.push_back({opt_number((*bands)[i], "weight", path, 0.0),
                                   opt_number((*bands)[i], "min_s", path, 1.0),
                                   opt_number((*bands)[i], "max_s", path, 1.0)});
      }
    }
    c.mixture.memory_sigma = opt_number(*w, "memory_sigma", "workload", 0.5);
    try {
      sim::validate(c.mixture);
    } catch (const Error& e) {
      bad("workload", e.what());
    }
  }
  const auto slots = opt_uint(doc, "slots_per_worker", "", 4);
  if (slots == 0 || slots > 1024) {
    bad("slots_per_worker", "must be in [1, 1024]");
  }
  c.sim.slots_per_worker = static_cast<int>(slots);
  c.log_path = opt_string(doc, "log_path", "", "");
  return c;
}

nlohmann::json to_json(const GatewayConfig& c) {
  json doc = json::object();
  doc["zones"] = json::array();
  for (const auto& z : c.zones) {
    doc["zones"].push_back({{"name", z.name}, {"kind", storage::to_string(z.kind)}});
  }
  doc["clusters"] = json::array();
  for (const auto& d : c.clusters) {
    doc["clusters"].push_back(to_json(d));
  }
  doc["mounts"] = json::array();
  for (const auto& m : c.mounts) {
    doc["mounts"].push_back({{"physical_prefix", m.physical_prefix},
                             {"unified_prefix", m.unified_prefix},
                             {"zone", m.zone}});
  }
  doc["regex_rules"] = json::array();
  for (const auto& r : c.regex_rules) {
    doc["regex_rules"].push_back({{"pattern", r.pattern},
                                  {"unified_template", r.unified_template},
                                  {"zone", r.zone}});
  }
  doc["datasets"] = json::array();
  for (const auto& d : c.datasets) {
    json reps = json::array();
    for (const auto& r : d.replicas) {
      reps.push_back({{"zone", r.zone}, {"uri", r.uri}});
    }
    doc["datasets"].push_back(
        {{"name", d.name}, {"size_bytes", d.size_bytes}, {"replicas", reps}});
  }
  doc["policy"] = routing::to_string(c.policy.kind);
  doc["heavy_cluster_ids"] = c.policy.heavy_cluster_ids;
  doc["heavy_threshold_bytes"] = c.policy.heavy_threshold_bytes;
  doc["seed"] = c.seed;
  doc["probe"] = {{"interval_s", c.probe.interval.count()},
                  {"failure_threshold", c.probe.failure_threshold}};
  json bands = json::array();
  for (const auto& b : c.mixture.bands) {
    bands.push_back({{"weight", b.weight}, {"min_s", b.min_seconds}, {"max_s", b.max_seconds}});
  }
  doc["workload"] = {{"bands", bands}, {"memory_sigma", c.mixture.memory_sigma}};
  doc["slots_per_worker"] = c.sim.slots_per_worker;
  doc["log_path"] = c.log_path;
  return doc;
}

GatewayConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open config file " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  return parse_config(doc);
}

std::string config_path_from_env(const std::string& fallback) {
  const char* env = std::getenv("FEDGATE_CONFIG");
  return env != nullptr && *env != '\0' ? std::string(env) : fallback;
}

void populate(storage::StorageFederation& catalog, const GatewayConfig& config) {
  for (const auto& z : config.zones) {
    catalog.add_zone(z);
  }
  for (const auto& m : config.mounts) {
    catalog.add_mount_rule(m);
  }
  for (const auto& r : config.regex_rules) {
    catalog.add_regex_rule(r);
  }
  for (const auto& d : config.datasets) {
    for (const auto& r : d.replicas) {
      catalog.register_replica(d.name, r.zone, r.uri, d.size_bytes);
    }
  }
}

} // namespace fedgate::config
