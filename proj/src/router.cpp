#include "fedgate/router.hpp"

#include <algorithm>

#include "fedgate/error.hpp"
#include "fedgate/storage_federation.hpp"
#include "fedgate/strings.hpp"

namespace fedgate::routing {

namespace {

template <typename Range, typename Fn>
std::string join(const Range& items, Fn&& fn) {
  std::string out = "[";
  bool first = true;
  for (const auto& item : items) {
    if (!first) {
      out += ",";
    }
    first = false;
    out += fn(item);
  }
  return out + "]";
}

std::string join_names(const std::set<std::string>& names) {
  return join(names, [](const std::string& s) { return s; });
}

std::string join_ids(const Candidates& cands) {
  return join(cands, [](const cluster::ClusterView* v) { return v->id(); });
}

} // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kRoundRobin:
      return "ROUND_ROBIN";
    case PolicyKind::kRandom:
      return "RANDOM";
    case PolicyKind::kLeastLoaded:
      return "LEAST_LOADED";
    case PolicyKind::kCostBased:
      return "COST_BASED";
  }
  return "ROUND_ROBIN";
}

std::optional<PolicyKind> policy_kind_from_string(std::string_view s) {
  std::string norm;
  for (char c : s) {
    norm.push_back(c == '-' ? '_' : c);
  }
  for (auto kind : {PolicyKind::kRoundRobin, PolicyKind::kRandom,
                    PolicyKind::kLeastLoaded, PolicyKind::kCostBased}) {
    if (iequals(norm, to_string(kind))) {
      return kind;
    }
  }
  return std::nullopt;
}

void validate(const PolicyConfig& config, const cluster::RegistrySnapshot& snap) {
  if (config.kind != PolicyKind::kCostBased) {
    return;
  }
  for (const auto& id : config.heavy_cluster_ids) {
    if (snap.find(id) != nullptr) {
      return;
    }
  }
  throw Error(ErrorCode::kInvalidPolicy,
              "COST_BASED needs heavy_cluster_ids naming a registered cluster");
}

const cluster::ClusterView& RoundRobinPolicy::choose(
    const Candidates& candidates, const cost::CostEstimate&,
    std::vector<std::string>& trace) {
  const auto tick = counter_.fetch_add(1, std::memory_order_relaxed);
  const auto& chosen = *candidates[tick % candidates.size()];
  trace.push_back("policy=ROUND_ROBIN counter=" + std::to_string(tick) +
                  " chose " + chosen.id());
  return chosen;
}

const cluster::ClusterView& RandomPolicy::choose(
    const Candidates& candidates, const cost::CostEstimate&,
    std::vector<std::string>& trace) {
  std::size_t index = 0;
  {
    std::lock_guard lock(mu_);
    index = std::uniform_int_distribution<std::size_t>(
        0, candidates.size() - 1)(rng_);
  }
  const auto& chosen = *candidates[index];
  trace.push_back("policy=RANDOM chose " + chosen.id());
  return chosen;
}

const cluster::ClusterView& LeastLoadedPolicy::choose(
    const Candidates& candidates, const cost::CostEstimate&,
    std::vector<std::string>& trace) {
  const cluster::ClusterView* best = candidates.front();
  for (const auto* c : candidates) {
    if (c->load.running_queries < best->load.running_queries ||
        (c->load.running_queries == best->load.running_queries &&
         c->id() < best->id())) {
      best = c;
    }
  }
  trace.push_back("policy=LEAST_LOADED chose " + best->id() + " running=" +
                  std::to_string(best->load.running_queries));
  return *best;
}

const cluster::ClusterView& CostBasedPolicy::choose(
    const Candidates& candidates, const cost::CostEstimate& estimate,
    std::vector<std::string>& trace) {
  const auto cls = cost::classify(estimate, threshold_);
  Candidates heavy;
  Candidates light;
  for (const auto* c : candidates) {
    (heavy_.count(c->id()) ? heavy : light).push_back(c);
  }
  Candidates restricted;
  if (cls == cost::ResourceClass::kHeavy) {
    restricted = heavy.empty() ? candidates : heavy;
    trace.push_back(std::string("policy=COST_BASED class=HEAVY ") +
                    (heavy.empty() ? "no heavy cluster available, using all "
                                   : "heavy clusters ") +
                    join_ids(restricted));
  } else {
    restricted = light.empty() ? candidates : light;
    trace.push_back(std::string("policy=COST_BASED class=LIGHT ") +
                    (light.empty() ? "only heavy clusters available "
                                   : "non-heavy clusters ") +
                    join_ids(restricted));
  }
  return least_loaded_.choose(restricted, estimate, trace);
}

std::unique_ptr<RoutingPolicy> make_policy(const PolicyConfig& config) {
  switch (config.kind) {
    case PolicyKind::kRoundRobin:
      return std::make_unique<RoundRobinPolicy>();
    case PolicyKind::kRandom:
      return std::make_unique<RandomPolicy>(config.seed);
    case PolicyKind::kLeastLoaded:
      return std::make_unique<LeastLoadedPolicy>();
    case PolicyKind::kCostBased:
      if (config.heavy_cluster_ids.empty()) {
        throw Error(ErrorCode::kInvalidPolicy,
                    "COST_BASED needs at least one heavy cluster id");
      }
      return std::make_unique<CostBasedPolicy>(config.heavy_cluster_ids,
                                               config.heavy_threshold_bytes);
  }
  throw Error(ErrorCode::kInvalidPolicy, "unknown policy");
}

std::set<std::string> eligible_zones(const sql::ParsedQuery& query,
                                     const storage::StorageFederation& catalog,
                                     std::vector<std::string>* trace) {
  auto note = [&](std::string line) {
    if (trace != nullptr) {
      trace->push_back(std::move(line));
    }
  };
  const auto zones = catalog.zones();
  std::set<std::string> eligible;
  for (const auto& z : zones) {
    eligible.insert(z.name);
  }
  note("directive=" + std::string(sql::to_string(query.directive)));

  bool constrained = false;
  for (const auto& table : query.tables) {
    auto entry = catalog.find_table(table);
    if (!entry) {
      note("table " + table.qualified_name() + " external (no zone constraint)");
      continue;
    }
    std::set<std::string> held;
    for (const auto& r : entry->replicas) {
      held.insert(r.zone);
    }
    note("table " + table.qualified_name() + " zones=" + join_names(held));
    std::set<std::string> next;
    std::set_intersection(eligible.begin(), eligible.end(), held.begin(),
                          held.end(), std::inserter(next, next.begin()));
    eligible = std::move(next);
    constrained = true;
  }
  if (constrained && eligible.empty()) {
    throw Error(ErrorCode::kNoEligibleZone,
                "tables are not co-located in any zone; cross-zone reads are "
                "not allowed");
  }

  auto kind_of = [&](const std::string& name) {
    for (const auto& z : zones) {
      if (z.name == name) {
        return z.kind;
      }
    }
    return storage::ZoneKind::kOnprem;
  };
  if (query.directive != sql::ZoneDirective::kAuto) {
    const auto wanted = query.directive == sql::ZoneDirective::kCloud
        ? storage::ZoneKind::kCloud
        : storage::ZoneKind::kOnprem;
    std::erase_if(eligible,
                  [&](const std::string& z) { return kind_of(z) != wanted; });
    if (eligible.empty()) {
      throw Error(ErrorCode::kNoEligibleZone,
                  "no " + std::string(storage::to_string(wanted)) +
                      " zone holds the queried tables");
    }
  }
  if (constrained) {
    const bool has_cloud = std::any_of(eligible.begin(), eligible.end(),
        [&](const std::string& z) { return kind_of(z) == storage::ZoneKind::kCloud; });
    const bool has_onprem = std::any_of(eligible.begin(), eligible.end(),
        [&](const std::string& z) { return kind_of(z) == storage::ZoneKind::kOnprem; });
    if (has_cloud && has_onprem) {
      std::erase_if(eligible, [&](const std::string& z) {
        return kind_of(z) == storage::ZoneKind::kOnprem;
      });
      note("cloud preference applied");
    }
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::kNoEligibleZone, "no zones configured");
  }
  note("eligible zones=" + join_names(eligible));
  return eligible;
}

std::set<std::string> required_catalogs(const sql::ParsedQuery& query) {
  std::set<std::string> out;
  for (const auto& t : query.tables) {
    if (t.catalog) {
      out.insert(to_lower(*t.catalog));
    }
  }
  return out;
}

Candidates candidates(const std::set<std::string>& zones,
                      const std::set<std::string>& required,
                      const cluster::RegistrySnapshot& snap,
                      const std::set<std::string>& exclude,
                      std::vector<std::string>* trace) {
  Candidates all;
  for (const auto& v : snap) {
    all.push_back(&v);
  }
  auto keep = [&](const char* label, auto&& pred) {
    std::erase_if(all, [&](const cluster::ClusterView* v) { return !pred(*v); });
    if (trace != nullptr) {
      trace->push_back(std::string(label) + join_ids(all));
    }
  };
  if (trace != nullptr) {
    trace->push_back("registered " + join_ids(all));
  }
  keep("online ", [](const cluster::ClusterView& v) { return v.online(); });
  if (!exclude.empty()) {
    keep("excluding failed ", [&](const cluster::ClusterView& v) {
      return exclude.count(v.id()) == 0;
    });
  }
  keep("in eligible zones ", [&](const cluster::ClusterView& v) {
    return zones.count(v.descriptor.zone) != 0;
  });
  if (!required.empty()) {
    keep("with catalogs ", [&](const cluster::ClusterView& v) {
      for (const auto& cat : required) {
        bool served = false;
        for (const auto& have : v.descriptor.catalogs) {
          served = served || iequals(have, cat);
        }
        if (!served) {
          return false;
        }
      }
      return true;
    });
  }
  if (all.empty()) {
    throw Error(ErrorCode::kNoAvailableCluster,
                "no online cluster in zones " + join_names(zones) +
                    (required.empty() ? std::string()
                                      : " serving " + join_names(required)));
  }
  return all;
}

RoutingDecision route(const sql::ParsedQuery& query, RoutingPolicy& policy,
                      const cluster::RegistrySnapshot& snap,
                      const cost::CostEstimate& estimate,
                      const storage::StorageFederation& catalog,
                      const std::set<std::string>& exclude) {
  RoutingDecision decision;
  auto& trace = decision.reason;
  auto zones = eligible_zones(query, catalog, &trace);
  auto cands = candidates(zones, required_catalogs(query), snap, exclude, &trace);
  trace.push_back("final candidates " + join_ids(cands));
  const auto& chosen = policy.choose(cands, estimate, trace);
  decision.cluster_id = chosen.id();
  decision.zone = chosen.descriptor.zone;
  return decision;
}

} // namespace fedgate::routing
