// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fedgate/clock.hpp"
#include "fedgate/config.hpp"
#include "fedgate/deploy_spec.hpp"
#include "fedgate/engine_simulator.hpp"
#include "fedgate/error.hpp"
#include "fedgate/gateway.hpp"
#include "fedgate/http_api.hpp"
#include "fedgate/router.hpp"
#include "fedgate/sql_frontend.hpp"
#include "fedgate/storage_federation.hpp"
#include "fedgate/workload.hpp"
#include "httplib.h"
#include "support/fixtures.hpp"
#include "support/tpch_queries.hpp"

using namespace fedgate;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Collects failed sub-checks; the first few end up in the detail line.
struct Checks {
  std::vector<std::string> failures;
  std::ostringstream notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      failures.push_back(what);
    }
  }
  Outcome outcome() const {
    std::string detail = notes.str();
    for (std::size_t i = 0; i < failures.size() && i < 3; ++i) {
      detail += " | failed: " + failures[i];
    }
    if (failures.size() > 3) {
      detail += " | +" + std::to_string(failures.size() - 3) + " more";
    }
    return {failures.empty(), detail};
  }
};

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    out.push_back(json::parse(line));
  }
  return out;
}

config::GatewayConfig identical_clusters(int n, routing::PolicyKind policy, std::uint64_t seed) {
  auto cfg = workload::default_bench_config();
  cfg.clusters.clear();
  for (int i = 1; i <= n; ++i) {
    cfg.clusters.push_back(
        fedgate::testing::descriptor("c" + std::to_string(i), "cloud", {"hive"}, 8, 256ULL << 30));
  }
  cfg.policy.kind = policy;
  cfg.policy.heavy_cluster_ids = {};
  cfg.policy.seed = seed;
  cfg.seed = seed;
  return cfg;
}

// 1 -------------------------------------------------------------------------
Outcome path_federation(double budget_s) {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  auto fed = fedgate::testing::partly_cloudy_federation();
  const auto hdfs = fed->resolve_physical("hdfs://cluster-X-nn:8020/logs/partly-cloudy");
  c.expect(hdfs.unified_path == "/DataCenter-1/cluster-X/logs/partly-cloudy",
           "hdfs -> " + hdfs.unified_path);
  c.expect(fed->resolve_unified("/DataCenter-1/cluster-X/logs/partly-cloudy") ==
               "hdfs://cluster-X-nn:8020/logs/partly-cloudy",
           "unified -> hdfs");
  const auto gs = fed->resolve_physical("gs://logs.partly-cloudy");
  c.expect(gs.unified_path == "/gcs/logs/partly-cloudy", "gs -> " + gs.unified_path);
  c.expect(gs.zone == "cloud", "gs zone");
  c.expect(fed->resolve_unified("/gcs/logs/partly-cloudy") == "gs://logs.partly-cloudy",
           "unified -> gs");

  std::mt19937_64 rng(1);
  int uris = 0;
  for (int table = 0; table < 1000; ++table) {
    storage::StorageFederation f;
    const auto rules = fedgate::testing::random_mount_table(rng, f);
    for (const auto& rule : rules) {
      for (int k = 0; k < 3; ++k) {
        const auto uri = rule.physical_prefix + fedgate::testing::random_suffix(rng);
        const auto back = f.resolve_unified(f.resolve_physical(uri).unified_path);
        c.expect(back == uri, "round trip " + uri + " -> " + back);
        ++uris;
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < budget_s, "runtime " + std::to_string(secs) + "s");
  c.notes << "canonical mappings exact; " << uris << " URIs over 1000 random tables round-trip";
  return c.outcome();
}

// 2 -------------------------------------------------------------------------
Outcome locality_routing() {
  Checks c;
  const auto cfg = fedgate::testing::gateway_config();
  std::map<std::string, storage::ZoneKind> kinds;
  for (const auto& z : cfg.zones) {
    kinds[z.name] = z.kind;
  }
  std::map<std::string, std::string> zone_of;
  for (const auto& d : cfg.clusters) {
    zone_of[d.id] = d.zone;
  }
  VirtualClock clock;
  auto gw = gateway::Gateway::from_config(cfg, clock);

  int cloud = 0;
  int onprem = 0;
  for (int i = 0; i < 100; ++i) {
    clock.advance(Seconds(0.5));
    const auto r = gw->submit_query("SELECT count(*) FROM logs.partly_cloudy");
    cloud += r.decision && kinds.at(zone_of.at(r.decision->cluster_id)) == storage::ZoneKind::kCloud;
  }
  for (int i = 0; i < 100; ++i) {
    clock.advance(Seconds(0.5));
    const auto r = gw->submit_query("-- zone: onprem\nSELECT count(*) FROM logs.partly_cloudy");
    onprem += r.decision && kinds.at(zone_of.at(r.decision->cluster_id)) == storage::ZoneKind::kOnprem;
  }
  const auto cross = gw->submit_query(
      "SELECT * FROM logs.onprem_only a JOIN logs.cloud_only b ON a.k = b.k");
  c.expect(cloud == 100, "AUTO on cloud " + std::to_string(cloud) + "/100");
  c.expect(onprem == 100, "ONPREM on-prem " + std::to_string(onprem) + "/100");
  c.expect(cross.error_code == ErrorCode::kNoEligibleZone, "cross-zone join not NoEligibleZone");
  c.notes << "AUTO->cloud " << cloud << "/100, ONPREM->on-prem " << onprem
          << "/100, cross-zone join "
          << (cross.error_code ? error_code_name(*cross.error_code) : std::string("accepted"));
  return c.outcome();
}

// 3 -------------------------------------------------------------------------
struct FailoverRun {
  std::string log;
  std::vector<std::pair<double, bool>> online_samples; // (time, target ONLINE)
};

FailoverRun run_failover(const workload::WorkloadSpec& spec, const config::GatewayConfig& cfg,
                         const std::string& target, double fail_at, double recover_at) {
  FailoverRun run;
  std::ostringstream log;
  workload::BenchOptions opts;
  opts.log_sink = &log;
  opts.actions = {{fail_at, workload::ScheduledAction::Kind::kFail, target},
                  {recover_at, workload::ScheduledAction::Kind::kRecover, target}};
  opts.observer = [&](gateway::Gateway& gw, Seconds now) {
    for (const auto& v : gw.clusters()) {
      if (v.id() == target) {
        run.online_samples.emplace_back(now.count(),
                                        v.status.state == cluster::ClusterState::kOnline);
      }
    }
  };
  workload::run_bench(spec, cfg, opts);
  run.log = log.str();
  return run;
}

Outcome failover() {
  Checks c;
  const std::string target = "c2";
  const double fail_at = 40;
  const double recover_at = 80;
  auto cfg = identical_clusters(3, routing::PolicyKind::kRoundRobin, 17);
  cfg.probe.interval = Seconds(5);
  cfg.probe.failure_threshold = 3;
  const double interval = cfg.probe.interval.count();
  const double detect_by = fail_at + cfg.probe.failure_threshold * interval;

  workload::WorkloadSpec spec;
  spec.query_count = 600;
  spec.arrival_rate = 5;
  spec.heavy_fraction = 0;
  spec.durations.bands = {{1.0, 1, 10}};
  spec.seed = 17;

  const auto run = run_failover(spec, cfg, target, fail_at, recover_at);
  const auto again = run_failover(spec, cfg, target, fail_at, recover_at);
  c.expect(run.log == again.log, "same seed produced a different log");
  const auto lines = parse_lines(run.log);

  std::map<std::string, json> before_failure;
  std::map<std::string, json> last;
  std::vector<double> routed_to_target;
  std::vector<double> routed_after_back;
  double last_during_outage = -1;
  int max_attempt = 0;
  int retried = 0;
  for (const auto& l : lines) {
    const auto id = l["id"].get<std::string>();
    const double ts = l["ts"].get<double>();
    if (ts < fail_at) {
      before_failure[id] = l;
    }
    last[id] = l;
    max_attempt = std::max(max_attempt, l["attempt"].get<int>());
    if (l["state"] == "ROUTED") {
      const bool to_target = l["cluster_id"] == target;
      if (to_target) {
        routed_to_target.push_back(ts);
        if (ts >= fail_at && ts < recover_at) {
          last_during_outage = ts;
        }
      }
      if (ts >= recover_at) {
        routed_after_back.push_back(to_target ? -ts : ts);
      }
    }
  }
  for (const auto& [id, l] : last) {
    retried += l["attempt"] == 2;
  }

  c.expect(last_during_outage <= detect_by,
           "routed to failed cluster at t=" + std::to_string(last_during_outage));

  // Back ONLINE at every sample taken one interval or more after recovery.
  bool online_in_time = true;
  for (const auto& [t, online] : run.online_samples) {
    if (t >= recover_at + interval && t < recover_at + 10 * interval) {
      online_in_time = online_in_time && online;
    }
  }
  c.expect(online_in_time, "not ONLINE one probe interval after recovery");
  // Round robin over three candidates reaches it within three decisions once
  // it is back; those decisions start at the first routing after
  // recover_at + interval.
  double back_at = -1;
  int decisions_after_probe = 0;
  for (double v : routed_after_back) {
    const double ts = std::fabs(v);
    if (ts >= recover_at + interval) {
      ++decisions_after_probe;
    }
    if (v < 0) {
      back_at = ts;
      break;
    }
  }
  c.expect(back_at >= 0 && decisions_after_probe <= 3,
           "no routing to recovered cluster within 3 decisions after the probe");

  int in_flight = 0;
  int lost = 0;
  for (const auto& [id, l] : before_failure) {
    if (l["state"] == "RUNNING" && l["cluster_id"] == target) {
      ++in_flight;
      const auto& fin = last.at(id);
      lost += fin["state"] == "FAILED" && fin["error_code"] == "ClusterLost";
    }
  }
  c.expect(in_flight > 0, "no query was running on the failed cluster");
  c.expect(lost == in_flight, std::to_string(in_flight - lost) + " in-flight queries not FAILED(ClusterLost)");
  c.expect(max_attempt <= 2, "attempt " + std::to_string(max_attempt));
  std::size_t terminal = 0;
  for (const auto& [id, l] : last) {
    terminal += l["state"] == "FINISHED" || l["state"] == "FAILED";
  }
  c.expect(terminal == spec.query_count, "non-terminal queries at end");

  c.notes << "fail t=" << fail_at << ", last route to it t=" << last_during_outage
          << " (bound " << detect_by << "); recover t=" << recover_at << ", first route back t="
          << back_at << "; in-flight lost " << lost << "/" << in_flight << "; retried "
          << retried << "; max attempt " << max_attempt << "; deterministic "
          << (run.log == again.log ? "yes" : "no");
  return c.outcome();
}

// 4 -------------------------------------------------------------------------
Outcome balance() {
  Checks c;
  workload::WorkloadSpec spec;
  spec.query_count = 1000;
  spec.heavy_fraction = 0;
  spec.seed = 4;

  const auto rr = workload::run_bench(spec, identical_clusters(4, routing::PolicyKind::kRoundRobin, 4));
  c.expect(rr.cluster_queries.size() == 4, "round robin used " + std::to_string(rr.cluster_queries.size()) + " clusters");
  std::ostringstream rr_counts;
  for (const auto& [id, n] : rr.cluster_queries) {
    c.expect(n >= 249 && n <= 251, "round robin " + id + "=" + std::to_string(n));
    rr_counts << id << "=" << n << " ";
  }

  // Binomial(1000, 1/4): 250 +- 4 sigma.
  const double bound = 4 * std::sqrt(1000 * 0.25 * 0.75);
  const auto rnd = workload::run_bench(spec, identical_clusters(4, routing::PolicyKind::kRandom, 4));
  c.expect(rnd.cluster_queries.size() == 4, "random used fewer than 4 clusters");
  std::ostringstream rnd_counts;
  for (const auto& [id, n] : rnd.cluster_queries) {
    c.expect(std::fabs(static_cast<double>(n) - 250) <= bound, "random " + id + "=" + std::to_string(n));
    rnd_counts << id << "=" << n << " ";
  }

  // Least loaded against brute force over every snapshot.
  const std::vector<std::string> ids = {"f", "b", "d", "a", "e", "c"};
  routing::LeastLoadedPolicy ll;
  std::vector<std::string> trace;
  long checked = 0;
  long mismatches = 0;
  for (int n = 1; n <= 6; ++n) {
    const long total = static_cast<long>(std::pow(10, n));
    for (long code = 0; code < total; ++code) {
      std::vector<cluster::ClusterView> views;
      long rest = code;
      for (int i = 0; i < n; ++i) {
        cluster::ClusterView v{fedgate::testing::descriptor(ids[i], "cloud"), {}, {}};
        v.load.running_queries = rest % 10;
        v.status.state = cluster::ClusterState::kOnline;
        views.push_back(std::move(v));
        rest /= 10;
      }
      const cluster::RegistrySnapshot snap(
          std::make_shared<const std::vector<cluster::ClusterView>>(views), 1);
      routing::Candidates cands;
      for (const auto& v : snap) {
        cands.push_back(&v);
      }
      const auto best = std::min_element(views.begin(), views.end(), [](const auto& x, const auto& y) {
        return std::pair(x.load.running_queries, x.id()) < std::pair(y.load.running_queries, y.id());
      });
      trace.clear();
      mismatches += ll.choose(cands, {}, trace).id() != best->id();
      ++checked;
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " least-loaded mismatches");
  c.notes << "round robin " << rr_counts.str() << "; random " << rnd_counts.str() << "(bound +-"
          << std::lround(bound) << "); least loaded " << checked - mismatches << "/" << checked
          << " snapshots";
  return c.outcome();
}

// 5 -------------------------------------------------------------------------
Outcome workload_shape() {
  Checks c;
  const sim::WorkloadMixture mix;
  std::mt19937_64 rng(5);
  const cost::CostEstimate est{10, 1ULL << 30};
  int sub_minute = 0;
  int heavy = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double d = sim::sample_profile(est, mix, rng).duration_seconds;
    sub_minute += d < 60;
    heavy += d > 300;
  }
  const double sub = static_cast<double>(sub_minute) / n;
  const double hv = static_cast<double>(heavy) / n;
  c.expect(sub >= 0.68 && sub <= 0.72, "sub-minute " + std::to_string(sub));
  c.expect(hv >= 0.09 && hv <= 0.11, "heavy " + std::to_string(hv));

  workload::WorkloadSpec spec;
  spec.query_count = 10000;
  spec.seed = 5;
  std::ostringstream log;
  workload::BenchOptions opts;
  opts.log_sink = &log;
  auto cfg = workload::default_bench_config();
  cfg.seed = 5;
  workload::run_bench(spec, cfg, opts);
  std::istringstream in(log.str());
  const auto report = workload::summarize_log(in);
  const std::map<std::string, double> want = {{"SELECT", spec.mix.select},
                                              {"CREATE", spec.mix.create},
                                              {"UPDATE", spec.mix.update},
                                              {"OTHER", spec.mix.other}};
  std::ostringstream shares;
  for (const auto& [cls, w] : want) {
    const auto it = report.class_counts.find(cls);
    const double got = it == report.class_counts.end()
                           ? 0.0
                           : static_cast<double>(it->second) / report.query_count;
    c.expect(std::fabs(got - w) <= 0.03, cls + " share " + std::to_string(got));
    shares << cls << "=" << std::round(got * 1000) / 1000 << " ";
  }
  c.expect(report.query_count == spec.query_count, "report covers " + std::to_string(report.query_count));
  c.notes << "sub-minute " << sub << ", over 300s " << hv << "; report of " << report.query_count
          << " logged queries: " << shares.str();
  return c.outcome();
}

// 6 -------------------------------------------------------------------------
Outcome heavy_isolation(double budget_s) {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  workload::WorkloadSpec spec;
  spec.query_count = 2000;
  spec.seed = 6;
  auto cfg = workload::default_bench_config();
  cfg.seed = 6;
  cfg.policy.kind = routing::PolicyKind::kRoundRobin;
  const auto rr = workload::run_bench(spec, cfg);
  cfg.policy.kind = routing::PolicyKind::kCostBased;
  const auto cb = workload::run_bench(spec, cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(rr.latency_light.p90 && cb.latency_light.p90, "missing light P90");
  if (rr.latency_light.p90 && cb.latency_light.p90) {
    c.expect(*cb.latency_light.p90 < *rr.latency_light.p90, "COST_BASED not lower");
    c.notes << "light P90 ROUND_ROBIN " << *rr.latency_light.p90 << "s vs COST_BASED "
            << *cb.latency_light.p90 << "s; ";
  }
  c.expect(secs < budget_s, "runtime " + std::to_string(secs) + "s");
  c.notes << "heavy on heavy-1 under COST_BASED: " << cb.latency_heavy.count << " finished";
  return c.outcome();
}

// 7 -------------------------------------------------------------------------
std::string inject_comments(std::string_view sql, std::mt19937_64& rng) {
  static const std::array<std::string_view, 7> kSeparators = {
      " ", "\n\t", " /* note */ ", "/*x*/", " -- trailing words\n", "\n-- select from join\n",
      "  \r\n  "};
  const auto tokens = sql::tokenize(sql);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) {
      out += kSeparators[rng() % kSeparators.size()];
    }
    out += tokens[i].text;
  }
  return out;
}

std::set<std::string> table_keys(const sql::TableSet& tables) {
  std::set<std::string> out;
  for (const auto& t : tables) {
    out.insert(t.key());
  }
  return out;
}

Outcome tpch_extraction() {
  Checks c;
  const auto& queries = fedgate::testing::tpch_queries();
  int exact = 0;
  for (const auto& q : queries) {
    const bool ok = table_keys(sql::extract_tables(q.sql)) == q.tables &&
                    sql::classify_statement(q.sql) == sql::StatementClass::kSelect;
    exact += ok;
    c.expect(ok, "Q" + std::to_string(q.number));
  }
  std::mt19937_64 rng(7);
  int fuzz = 0;
  int stable = 0;
  while (fuzz < 10000) {
    for (const auto& q : queries) {
      const auto parsed = sql::parse_query(inject_comments(q.sql, rng));
      const bool ok = parsed.statement_class == sql::StatementClass::kSelect &&
                      table_keys(parsed.tables) == q.tables;
      stable += ok;
      c.expect(ok, "fuzzed Q" + std::to_string(q.number));
      if (++fuzz == 10000) {
        break;
      }
    }
  }
  c.notes << exact << "/" << queries.size() << " templates exact; " << stable << "/" << fuzz
          << " fuzz cases invariant";
  return c.outcome();
}

// 8 -------------------------------------------------------------------------
bool has_line(const std::string& text, const std::string& want) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(' ');
    if (b != std::string::npos && line.substr(b) == want) {
      return true;
    }
  }
  return false;
}

Outcome deploy_translation() {
  Checks c;
  const auto spec = deploy::parse_unified_spec(R"({
    "cluster": "cluster1", "role": "sqlsystem", "environment": "devel",
    "name": "sqlsystem", "replicas": 1, "cpu_cores": 1.0,
    "ram_bytes": 2147483648, "disk_bytes": 2147483648,
    "ports": [{"name": "http", "port": 8080}, {"name": "service", "port": 8080}],
    "image": "sqlsystem",
    "command": "java -jar sqlsystem.jar -instance={{mesos.instance}}",
    "priority_class": "preemptible"})");
  const auto cloud = deploy::emit_cloud_manifest(spec);
  const auto dc = deploy::emit_datacenter_descriptor(spec);
  c.expect(has_line(cloud, "cpu: 1000m"), "cpu: 1000m");
  c.expect(has_line(cloud, "memory: 2Gi"), "memory: 2Gi");
  c.expect(has_line(cloud, "- containerPort: 8080"), "containerPort: 8080");
  c.expect(has_line(dc, "resources = Resources(cpu = 1.0, ram = 2 * GB, disk = 2 * GB)"),
           "cpu = 1.0 / ram = 2 * GB");
  c.expect(has_line(dc, "replicas = 1,"), "replicas = 1");

  std::mt19937_64 rng(8);
  int ok = 0;
  for (int i = 0; i < 1000; ++i) {
    deploy::UnifiedJobSpec s = spec;
    s.cpu_millicores = 1 + static_cast<std::int64_t>(rng() % 128000);
    s.ram_bytes = (1 + rng() % (1ULL << 21)) * deploy::kMiB;
    s.disk_bytes = (1 + rng() % (1ULL << 22)) * deploy::kMiB;
    s.replicas = 1 + static_cast<int>(rng() % 100);
    const deploy::Resources want{s.cpu_millicores, s.ram_bytes, s.disk_bytes};
    const bool good =
        deploy::cloud_manifest_resources(deploy::emit_cloud_manifest(s)) == want &&
        deploy::datacenter_descriptor_resources(deploy::emit_datacenter_descriptor(s)) == want &&
        deploy::emit_cloud_manifest(s) == deploy::emit_cloud_manifest(s);
    ok += good;
    c.expect(good, "round trip " + json(deploy::to_json(s)).dump());
  }
  c.notes << "reference lines byte-exact; " << ok << "/1000 random specs round-trip";
  return c.outcome();
}

// 9 -------------------------------------------------------------------------
Outcome stats_aggregation() {
  Checks c;
  auto cfg = workload::default_bench_config();
  cfg.seed = 9;
  VirtualClock clock;
  std::ostringstream log_out;
  gateway::QueryLog log(log_out);
  auto gw = gateway::Gateway::from_config(cfg, clock, &log);

  httplib::Server server;
  gateway::install_routes(server, *gw);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  gateway::GatewayClient client("http://127.0.0.1:" + std::to_string(port));

  workload::WorkloadSpec spec;
  spec.query_count = 1000;
  spec.arrival_rate = 0.5;
  spec.seed = 9;
  const auto trace = workload::generate_workload(spec);
  int samples = 0;
  std::uint64_t peak_running = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    clock.advance_to(Seconds(trace[i].arrival_s));
    gw->submit_query(trace[i].sql);
    if (i % 10 != 9) {
      continue;
    }
    ++samples;
    const auto status = client.status();
    std::uint64_t running = 0, queued = 0, memory = 0, pool = 0;
    std::int64_t workers = 0;
    for (const auto& cl : status["clusters"]) {
      running += cl["running_queries"].get<std::uint64_t>();
      queued += cl["queued_queries"].get<std::uint64_t>();
      workers += cl["active_workers"].get<std::int64_t>();
      memory += cl["memory_used_bytes"].get<std::uint64_t>();
      pool += cl["memory_pool_bytes"].get<std::uint64_t>();
    }
    std::uint64_t running_records = 0;
    for (const auto& r : gw->records()) {
      running_records += r.state == gateway::QueryState::kRunning;
    }
    const auto at = " at t=" + std::to_string(status["at"].get<double>());
    c.expect(status["total_running_queries"] == running, "running sum" + at);
    c.expect(status["total_queued_queries"] == queued, "queued sum" + at);
    c.expect(status["total_active_workers"] == workers, "workers sum" + at);
    c.expect(status["total_memory_used_bytes"] == memory, "memory sum" + at);
    c.expect(status["total_memory_pool_bytes"] == pool, "pool sum" + at);
    c.expect(running == running_records, "RUNNING records" + at);
    peak_running = std::max(peak_running, running);
  }
  server.stop();
  serving.join();
  c.expect(samples == 100, "sampled " + std::to_string(samples));
  c.expect(peak_running > 0, "nothing was running at any sample");
  c.notes << samples << " instants via GET /v1/status; peak running " << peak_running;
  return c.outcome();
}

} // namespace

int main() {
  struct Criterion {
    int number;
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "path federation fidelity (<1s)", [] { return path_federation(1.0); }},
      {2, "locality routing", locality_routing},
      {3, "failover", failover},
      {4, "balance", balance},
      {5, "workload shape", workload_shape},
      {6, "heavy-query isolation (<30s)", [] { return heavy_isolation(30.0); }},
      {7, "TPC-H extraction", tpch_extraction},
      {8, "deploy translation", deploy_translation},
      {9, "stats aggregation", stats_aggregation},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << " " << cr.number << " " << cr.name << " ["
              << std::fixed << std::setprecision(2) << secs << "s] " << std::defaultfloat
              << out.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
