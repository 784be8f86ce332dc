#include "fedgate/workload.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "fedgate/http_api.hpp"

namespace fedgate::workload {

using nlohmann::json;

namespace {

constexpr std::uint64_t kGiB = 1ULL << 30;

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kInvalidSpec, what);
}

std::string fill(std::string text, const std::string& key, const std::string& value) {
  const std::string token = "{" + key + "}";
  for (auto pos = text.find(token); pos != std::string::npos;
       pos = text.find(token, pos + value.size())) {
    text.replace(pos, token.size(), value);
  }
  return text;
}

const std::vector<std::string> kLightSelect = {
    "SELECT count(*) FROM {t}",
    "SELECT * FROM {t} LIMIT 100",
    "SELECT a.*, b.* FROM {t} a JOIN {u} b ON a.id = b.id LIMIT 100",
    "SELECT k, sum(v) FROM {t} GROUP BY k",
    "WITH recent AS (SELECT * FROM {t} WHERE ts > 0) SELECT count(*) FROM recent",
};
const std::vector<std::string> kHeavySelect = {
    "SELECT user_id, count(*) FROM {h} GROUP BY user_id",
    "SELECT * FROM {h} WHERE ds >= '2020-01-01'",
};
const std::vector<std::string> kCreate = {
    "CREATE TABLE tmp_{n} AS SELECT * FROM {t} WHERE 1 = 1",
    "CREATE VIEW v_{n} AS SELECT count(*) AS c FROM {t}",
};
const std::vector<std::string> kUpdate = {
    "INSERT INTO tmp_{n} SELECT * FROM {t}",
    "DELETE FROM tmp_{n} WHERE id < 10",
    "UPDATE tmp_{n} SET flag = 1 WHERE id = 7",
};
const std::vector<std::string> kOther = {
    "SHOW TABLES",
    "DESCRIBE {t}",
    "EXPLAIN SELECT * FROM {t}",
    "SHOW CATALOGS",
};

LatencySummary summarize(std::vector<double> values) {
  LatencySummary s;
  s.count = values.size();
  s.p50 = sim::percentile(values, 50);
  s.p90 = sim::percentile(values, 90);
  s.p99 = sim::percentile(std::move(values), 99);
  return s;
}

json to_json(const LatencySummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"count", s.count}, {"p50_s", opt(s.p50)}, {"p90_s", opt(s.p90)},
          {"p99_s", opt(s.p99)}};
}

bool terminal_state(const json& line) {
  return line.value("state", "") == "FINISHED" || line.value("state", "") == "FAILED";
}

} // namespace

void validate(const WorkloadSpec& spec) {
  const double w[] = {spec.mix.select, spec.mix.create, spec.mix.update, spec.mix.other};
  double sum = 0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0) {
      bad("statement weights must be non-negative");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    bad("statement weights sum to " + std::to_string(sum) + ", not 1");
  }
  if (!(spec.arrival_rate > 0) || !std::isfinite(spec.arrival_rate)) {
    bad("arrival rate must be positive");
  }
  if (!(spec.heavy_fraction >= 0 && spec.heavy_fraction <= 1)) {
    bad("heavy fraction must lie in [0, 1]");
  }
  if (spec.tables.empty()) {
    bad("workload needs at least one table");
  }
  try {
    sim::validate(spec.durations);
  } catch (const Error& e) {
    bad(e.what());
  }
}

std::vector<WorkloadItem> generate_workload(const WorkloadSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> gap(spec.arrival_rate);
  auto pick = [&](const auto& items) -> const auto& {
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
  };

  std::vector<WorkloadItem> out;
  out.reserve(spec.query_count);
  double t = 0.0;
  for (std::size_t i = 0; i < spec.query_count; ++i) {
    t += gap(rng);
    WorkloadItem item;
    item.arrival_s = t;
    const double roll = unit(rng);
    const auto& m = spec.mix;
    const std::vector<std::string>* pool = nullptr;
    if (roll < m.select) {
      item.intended = sql::StatementClass::kSelect;
      item.heavy_template = unit(rng) < spec.heavy_fraction;
      pool = item.heavy_template ? &kHeavySelect : &kLightSelect;
    } else if (roll < m.select + m.create) {
      item.intended = sql::StatementClass::kCreate;
      pool = &kCreate;
    } else if (roll < m.select + m.create + m.update) {
      item.intended = sql::StatementClass::kUpdate;
      pool = &kUpdate;
    } else {
      item.intended = sql::StatementClass::kOther;
      pool = &kOther;
    }
    std::string text = pick(*pool);
    const auto& first = pick(spec.tables);
    auto second = pick(spec.tables);
    if (second == first && spec.tables.size() > 1) {
      second = spec.tables[(std::find(spec.tables.begin(), spec.tables.end(), first) -
                            spec.tables.begin() + 1) %
                           static_cast<long>(spec.tables.size())];
    }
    text = fill(text, "t", first);
    text = fill(text, "u", second);
    text = fill(text, "h", spec.heavy_table);
    text = fill(text, "n", std::to_string(i));
    item.sql = std::move(text);
    out.push_back(std::move(item));
  }
  return out;
}

config::GatewayConfig default_bench_config() {
  config::GatewayConfig c;
  c.zones = {{"datacenter-1", storage::ZoneKind::kOnprem},
             {"cloud", storage::ZoneKind::kCloud}};
  c.mounts = {{"hdfs://dc1-nn:8020/warehouse", "/DataCenter-1/warehouse", "datacenter-1"}};
  c.regex_rules = {{R"(gs://(?<ns>[^.]+)\.(?<ds>.+))", "/gcs/{ns}/{ds}", "cloud"}};
  const std::vector<std::pair<std::string, std::uint64_t>> tpch = {
      {"lineitem", 24 * kGiB}, {"orders", 5 * kGiB},     {"partsupp", 4 * kGiB},
      {"part", 1 * kGiB},      {"customer", 1 * kGiB},   {"supplier", 64ULL << 20},
      {"nation", 4096},        {"region", 1024}};
  for (const auto& [name, size] : tpch) {
    c.datasets.push_back({name, size,
                          {{"datacenter-1", "hdfs://dc1-nn:8020/warehouse/tpch/" + name},
                           {"cloud", "gs://tpch." + name}}});
  }
  c.datasets.push_back({"events_archive", 1'200'000'000'000ULL,
                        {{"cloud", "gs://archive.events"}}});
  c.clusters = {
      {"light-1", "cloud", "sim://light-1", {"hive"}, 8, 256 * kGiB},
      {"light-2", "cloud", "sim://light-2", {"hive"}, 8, 256 * kGiB},
      {"heavy-1", "cloud", "sim://heavy-1", {"hive"}, 16, 512 * kGiB},
  };
  c.policy.kind = routing::PolicyKind::kRoundRobin;
  c.policy.heavy_cluster_ids = {"heavy-1"};
  return c;
}

json to_json(const BenchReport& r) {
  json share = json::object();
  for (const auto& [cls, n] : r.class_counts) {
    share[cls] = r.query_count ? static_cast<double>(n) / r.query_count : 0.0;
  }
  return {{"query_count", r.query_count},
          {"class_counts", r.class_counts},
          {"class_share", share},
          {"finished", r.finished},
          {"failed", r.failed},
          {"failures_by_code", r.failures_by_code},
          {"latency", {{"all", to_json(r.latency_all)},
                       {"light", to_json(r.latency_light)},
                       {"heavy", to_json(r.latency_heavy)}}},
          {"cluster_queries", r.cluster_queries},
          {"cluster_share", r.cluster_share},
          {"span_s", r.span_s},
          {"wall_time_s", r.wall_time_s},
          {"policy", r.policy}};
}

BenchReport summarize_records(const std::vector<json>& lines) {
  std::map<std::string, json> last;
  std::vector<std::string> order;
  for (const auto& line : lines) {
    if (!line.is_object() || !line.contains("id") || !line["id"].is_string()) {
      continue;
    }
    const auto id = line["id"].get<std::string>();
    auto [it, inserted] = last.insert_or_assign(id, line);
    if (inserted) {
      order.push_back(id);
    }
  }
  BenchReport r;
  r.query_count = last.size();
  std::vector<double> all;
  std::vector<double> light;
  std::vector<double> heavy;
  double first_submit = 0;
  double last_end = 0;
  bool any = false;
  for (const auto& id : order) {
    const auto& line = last[id];
    const auto cls = line.contains("class") && line["class"].is_string()
                         ? line["class"].get<std::string>()
                         : std::string("INVALID");
    ++r.class_counts[cls];
    if (line.contains("cluster_id") && line["cluster_id"].is_string()) {
      ++r.cluster_queries[line["cluster_id"].get<std::string>()];
    }
    const auto state = line.value("state", "");
    if (state == "FINISHED") {
      ++r.finished;
      if (line.contains("latency_s") && line["latency_s"].is_number()) {
        const double lat = line["latency_s"].get<double>();
        all.push_back(lat);
        (line.value("resource_class", "LIGHT") == "HEAVY" ? heavy : light).push_back(lat);
      }
    } else if (state == "FAILED") {
      ++r.failed;
      const auto code = line.contains("error_code") && line["error_code"].is_string()
                            ? line["error_code"].get<std::string>()
                            : std::string("Unknown");
      ++r.failures_by_code[code];
    }
    if (line.contains("submit_s") && line["submit_s"].is_number()) {
      const double s = line["submit_s"].get<double>();
      first_submit = any ? std::min(first_submit, s) : s;
      any = true;
    }
    if (terminal_state(line) && line.contains("end_s") && line["end_s"].is_number()) {
      last_end = std::max(last_end, line["end_s"].get<double>());
    }
  }
  r.span_s = any ? std::max(0.0, last_end - first_submit) : 0.0;
  std::size_t routed = 0;
  for (const auto& [id, n] : r.cluster_queries) {
    routed += n;
  }
  for (const auto& [id, n] : r.cluster_queries) {
    r.cluster_share[id] = static_cast<double>(n) / static_cast<double>(routed);
  }
  r.latency_all = summarize(std::move(all));
  r.latency_light = summarize(std::move(light));
  r.latency_heavy = summarize(std::move(heavy));
  return r;
}

BenchReport summarize_log(std::istream& log) {
  std::vector<json> lines;
  std::string text;
  while (std::getline(log, text)) {
    if (text.empty()) {
      continue;
    }
    auto parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded()) {
      lines.push_back(std::move(parsed));
    }
  }
  return summarize_records(lines);
}

BenchReport run_bench(const WorkloadSpec& spec, const config::GatewayConfig& cfg,
                      const BenchOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto trace = generate_workload(spec);

  VirtualClock clock;
  std::stringstream log_stream;
  gateway::QueryLog log(log_stream);
  auto effective = cfg;
  effective.mixture = spec.durations;
  auto gw = gateway::Gateway::from_config(effective, clock, &log);

  auto actions = options.actions;
  std::stable_sort(actions.begin(), actions.end(),
                   [](const auto& a, const auto& b) { return a.at_s < b.at_s; });
  std::size_t next_action = 0;
  auto notify = [&] {
    if (options.observer) {
      options.observer(*gw, clock.now());
    }
  };
  auto step_to = [&](double t) {
    while (next_action < actions.size() && actions[next_action].at_s <= t) {
      const auto& a = actions[next_action++];
      clock.advance_to(Seconds(a.at_s));
      if (a.kind == ScheduledAction::Kind::kFail) {
        gw->inject_failure(a.cluster_id);
      } else {
        gw->recover(a.cluster_id);
      }
      notify();
    }
    clock.advance_to(Seconds(t));
    gw->pump();
  };

  for (const auto& item : trace) {
    step_to(item.arrival_s);
    gw->submit_query(item.sql);
    notify();
  }
  while (next_action < actions.size()) {
    step_to(actions[next_action].at_s);
  }
  for (std::size_t guard = 0; gw->open_count() > 0; ++guard) {
    if (guard > 100'000'000) {
      throw std::logic_error("bench did not drain");
    }
    const auto next = gw->next_sim_event();
    step_to(next ? next->count() : clock.now().count() + cfg.probe.interval.count());
  }

  if (options.log_sink != nullptr) {
    *options.log_sink << log_stream.str();
    options.log_sink->flush();
  }
  log_stream.seekg(0);
  auto report = summarize_log(log_stream);
  report.policy = std::string(routing::to_string(cfg.policy.kind));
  report.wall_time_s = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - wall_start)
                           .count();
  return report;
}

BenchReport run_live_bench(const WorkloadSpec& spec, const std::string& url,
                           int concurrency, double poll_timeout_s) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto trace = generate_workload(spec);
  concurrency = std::max(1, concurrency);
  gateway::GatewayClient probe_client(url);
  probe_client.status();

  std::mutex mu;
  std::size_t next = 0;
  std::vector<json> records(trace.size());
  std::optional<Error> failure;
  auto worker = [&] {
    gateway::GatewayClient client(url);
    for (;;) {
      std::size_t i = 0;
      {
        std::lock_guard lock(mu);
        if (next >= trace.size() || failure) {
          return;
        }
        i = next++;
      }
      try {
        auto rec = client.submit(trace[i].sql);
        const auto deadline = std::chrono::steady_clock::now() +
                              std::chrono::duration<double>(poll_timeout_s);
        while (!terminal_state(rec) && std::chrono::steady_clock::now() < deadline) {
          std::this_thread::sleep_for(std::chrono::milliseconds(50));
          rec = client.get_query(rec["id"].get<std::string>());
        }
        std::lock_guard lock(mu);
        records[i] = std::move(rec);
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (!failure) {
          failure = e;
        }
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  for (int k = 0; k < concurrency; ++k) {
    threads.emplace_back(worker);
  }
  for (auto& t : threads) {
    t.join();
  }
  if (failure) {
    throw *failure;
  }
  auto report = summarize_records(records);
  report.policy = "live";
  report.wall_time_s = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - wall_start)
                           .count();
  return report;
}

} // namespace fedgate::workload
