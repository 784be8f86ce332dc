#include "fedgate/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fedgate::gateway {

using nlohmann::json;

std::string_view to_string(QueryState state) {
  switch (state) {
    case QueryState::kQueued:
      return "QUEUED";
    case QueryState::kRouted:
      return "ROUTED";
    case QueryState::kRunning:
      return "RUNNING";
    case QueryState::kFinished:
      return "FINISHED";
    case QueryState::kFailed:
      return "FAILED";
  }
  return "QUEUED";
}

bool is_terminal(QueryState state) {
  return state == QueryState::kFinished || state == QueryState::kFailed;
}

std::optional<double> QueryRecord::duration_seconds() const {
  if (state != QueryState::kFinished || !start_time || !end_time) {
    return std::nullopt;
  }
  return (*end_time - *start_time).count();
}

std::optional<double> QueryRecord::latency_seconds() const {
  if (!end_time) {
    return std::nullopt;
  }
  return (*end_time - submit_time).count();
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json opt_seconds(const std::optional<Seconds>& v) {
  return v ? json(v->count()) : json(nullptr);
}

// Crockford base32, most significant digit first.
void append_base32(std::string& out, std::uint64_t value, int digits) {
  static constexpr char kAlphabet[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
  std::string buf(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i) {
    buf[static_cast<std::size_t>(i)] = kAlphabet[value & 31];
    value >>= 5;
  }
  out += buf;
}

} // namespace

json to_json(const QueryRecord& r, bool with_trace) {
  json j;
  j["id"] = r.id;
  j["sql"] = r.raw_sql;
  j["class"] = r.statement_class ? json(sql::to_string(*r.statement_class))
                                 : json(nullptr);
  j["tables"] = r.tables;
  j["zone"] = r.decision ? json(r.decision->zone) : json(nullptr);
  j["cluster_id"] = r.decision ? json(r.decision->cluster_id) : json(nullptr);
  j["state"] = to_string(r.state);
  j["attempt"] = r.attempt;
  j["predicted_cpu_s"] = r.estimate.cpu_seconds;
  j["predicted_mem_bytes"] = r.estimate.peak_memory_bytes;
  j["resource_class"] = cost::to_string(r.resource_class);
  j["duration_s"] = opt(r.duration_seconds());
  j["latency_s"] = opt(r.latency_seconds());
  j["submit_s"] = r.submit_time.count();
  j["start_s"] = opt_seconds(r.start_time);
  j["end_s"] = opt_seconds(r.end_time);
  j["error"] = opt(r.error);
  j["error_code"] =
      r.error_code ? json(error_code_name(*r.error_code)) : json(nullptr);
  j["tried_clusters"] = r.tried_clusters;
  if (with_trace) {
    j["reason"] = r.decision ? json(r.decision->reason) : json::array();
  }
  return j;
}

QueryLog::QueryLog(const std::string& path) {
  auto file = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*file) {
    error_ = "cannot open query log " + path;
    return;
  }
  out_ = file.get();
  owned_ = std::move(file);
}

QueryLog::QueryLog(std::ostream& out) : out_(&out) {}

void QueryLog::write(const QueryRecord& record, Seconds at) {
  auto line = to_json(record);
  line["ts"] = at.count();
  const auto text = line.dump();
  std::lock_guard lock(mu_);
  if (out_ == nullptr) {
    return;
  }
  *out_ << text << '\n';
  if (is_terminal(record.state)) {
    out_->flush();
  }
  if (!*out_) {
    error_ = "write to query log failed";
    out_->clear();
  }
}

bool QueryLog::healthy() const {
  std::lock_guard lock(mu_);
  return error_.empty();
}

std::string QueryLog::last_error() const {
  std::lock_guard lock(mu_);
  return error_;
}

json to_json(const AggregatedStats& s) {
  json clusters = json::array();
  for (const auto& c : s.clusters) {
    clusters.push_back({{"cluster_id", c.cluster_id},
                        {"submitted", c.submitted},
                        {"running_queries", c.running_queries},
                        {"queued_queries", c.queued_queries},
                        {"active_workers", c.active_workers},
                        {"memory_used_bytes", c.memory_used_bytes},
                        {"memory_pool_bytes", c.memory_pool_bytes},
                        {"completed_count", c.completed_count},
                        {"failed_count", c.failed_count},
                        {"p90_execution_seconds", opt(c.p90_duration())}});
  }
  json states = json::object();
  for (const auto& [state, n] : s.records_by_state) {
    states[std::string(to_string(state))] = n;
  }
  return {{"at", s.at.count()},
          {"total_running_queries", s.total_running_queries},
          {"total_queued_queries", s.total_queued_queries},
          {"total_active_workers", s.total_active_workers},
          {"total_memory_used_bytes", s.total_memory_used_bytes},
          {"total_memory_pool_bytes", s.total_memory_pool_bytes},
          {"failed_count", s.failed_count},
          {"p90_execution_seconds", opt(s.p90_execution_seconds)},
          {"records_by_state", states},
          {"log_healthy", s.log_healthy},
          {"clusters", clusters}};
}

Gateway::Gateway(std::shared_ptr<const storage::StorageFederation> catalog,
                 const Clock& clock, GatewayOptions options, QueryLog* log)
    : catalog_(std::move(catalog)),
      clock_(clock),
      options_(std::move(options)),
      log_(log),
      registry_(options_.probe),
      sim_(options_.sim),
      policy_(routing::make_policy(options_.policy)),
      rng_(options_.seed),
      next_probe_(clock.now() + options_.probe.interval) {
  sim::validate(options_.mixture);
  processed_until_ = clock.now();
}

Gateway::~Gateway() = default;

std::unique_ptr<Gateway> Gateway::from_config(const config::GatewayConfig& cfg,
                                              const Clock& clock, QueryLog* log,
                                              std::uint64_t id_epoch_ms) {
  auto catalog = std::make_shared<storage::StorageFederation>();
  config::populate(*catalog, cfg);
  GatewayOptions opts;
  opts.policy = cfg.policy;
  opts.probe = cfg.probe;
  opts.mixture = cfg.mixture;
  opts.sim = cfg.sim;
  opts.seed = cfg.seed;
  opts.id_epoch_ms = id_epoch_ms;
  auto gw = std::make_unique<Gateway>(std::move(catalog), clock, opts, log);
  for (const auto& d : cfg.clusters) {
    if (!gw->catalog().find_zone(d.zone)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "cluster '" + d.id + "' is in unknown zone '" + d.zone + "'");
    }
    gw->add_cluster(d);
  }
  routing::validate(cfg.policy, gw->clusters());
  return gw;
}

void Gateway::add_cluster(const cluster::ClusterDescriptor& desc) {
  std::lock_guard lock(mu_);
  advance_locked(clock_.now());
  if (!catalog_->find_zone(desc.zone)) {
    throw Error(ErrorCode::kUnknownZone, "unknown zone '" + desc.zone + "'");
  }
  registry_.register_cluster(desc);
  try {
    sim_.add_cluster(desc);
  } catch (...) {
    registry_.deregister_cluster(desc.id);
    throw;
  }
}

void Gateway::remove_cluster(std::string_view id) {
  std::lock_guard lock(mu_);
  const auto now = clock_.now();
  advance_locked(now);
  registry_.deregister_cluster(id);
  for (const auto& e : sim_.remove_cluster(id, now)) {
    handle_event(e);
  }
}

void Gateway::inject_failure(std::string_view id) {
  std::lock_guard lock(mu_);
  const auto now = clock_.now();
  advance_locked(now);
  for (const auto& e : sim_.inject_failure(id, now)) {
    handle_event(e);
  }
}

void Gateway::recover(std::string_view id) {
  std::lock_guard lock(mu_);
  advance_locked(clock_.now());
  sim_.recover(id);
}

std::string Gateway::next_id_locked(Seconds now) {
  const auto ms = options_.id_epoch_ms +
                  static_cast<std::uint64_t>(std::llround(std::max(0.0, now.count()) * 1000.0));
  std::string id;
  append_base32(id, ms, 10);
  append_base32(id, ++sequence_, 16);
  return id;
}

void Gateway::transition_locked(QueryRecord& rec, QueryState next, Seconds now) {
  rec.state = next;
  if (is_terminal(next)) {
    rec.end_time = now;
  }
  if (log_ != nullptr) {
    log_->write(rec, now);
  }
}

void Gateway::release_locked(QueryRecord& rec) {
  auto it = holding_load_.find(rec.id);
  if (it == holding_load_.end()) {
    return;
  }
  registry_.record_release(it->second, rec.estimate.peak_memory_bytes);
  holding_load_.erase(it);
}

void Gateway::fail_locked(QueryRecord& rec, ErrorCode code,
                          const std::string& message, Seconds now) {
  release_locked(rec);
  rec.error = message;
  rec.error_code = code;
  transition_locked(rec, QueryState::kFailed, now);
}

void Gateway::lose_locked(QueryRecord& rec, ErrorCode code,
                          const std::string& message, Seconds now) {
  release_locked(rec);
  if (rec.attempt >= 2) {
    fail_locked(rec, code, message, now);
    return;
  }
  rec.attempt = 2;
  rec.start_time.reset();
  transition_locked(rec, QueryState::kQueued, now);
  dispatch_locked(rec, sql::parse_query(rec.raw_sql), now);
}

void Gateway::dispatch_locked(QueryRecord& rec, const sql::ParsedQuery& q,
                              Seconds now) {
  const std::set<std::string> exclude(rec.tried_clusters.begin(),
                                      rec.tried_clusters.end());
  routing::RoutingDecision decision;
  try {
    decision = routing::route(q, *policy_, registry_.snapshot(), rec.estimate,
                              *catalog_, exclude);
  } catch (const Error& e) {
    fail_locked(rec, e.code(), e.what(), now);
    return;
  }
  rec.decision = decision;
  rec.tried_clusters.push_back(decision.cluster_id);
  const auto profile = sim::sample_profile(rec.estimate, options_.mixture, rng_);
  rec.sim_memory_bytes = profile.actual_memory_bytes;
  registry_.record_dispatch(decision.cluster_id, rec.estimate.peak_memory_bytes);
  holding_load_[rec.id] = decision.cluster_id;
  transition_locked(rec, QueryState::kRouted, now);

  sim::Admission admission;
  try {
    admission = sim_.submit(decision.cluster_id, rec.id, profile, now);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kClusterUnreachable &&
        e.code() != ErrorCode::kUnknownCluster) {
      throw;
    }
    lose_locked(rec, ErrorCode::kClusterUnreachable, e.what(), now);
    return;
  }
  switch (admission.status) {
    case sim::AdmissionStatus::kRunning:
      rec.start_time = now;
      transition_locked(rec, QueryState::kRunning, now);
      break;
    case sim::AdmissionStatus::kQueued:
      break;
    case sim::AdmissionStatus::kFailed:
      fail_locked(rec, admission.error.value_or(ErrorCode::kMemoryExceeded),
                  "query needs " + std::to_string(profile.actual_memory_bytes) +
                      " bytes, more than the memory pool of " +
                      decision.cluster_id,
                  now);
      break;
  }
}

void Gateway::handle_event(const sim::SimEvent& e) {
  auto it = records_.find(e.query_id);
  if (it == records_.end() || is_terminal(it->second.state)) {
    return;
  }
  auto& rec = it->second;
  // Events from a cluster this query already left.
  if (rec.tried_clusters.empty() || rec.tried_clusters.back() != e.cluster_id) {
    return;
  }
  switch (e.kind) {
    case sim::EventKind::kStarted:
      if (rec.state == QueryState::kRouted) {
        rec.start_time = e.at;
        transition_locked(rec, QueryState::kRunning, e.at);
      }
      break;
    case sim::EventKind::kCompleted:
      release_locked(rec);
      transition_locked(rec, QueryState::kFinished, e.at);
      break;
    case sim::EventKind::kFailed: {
      const auto code = e.error.value_or(ErrorCode::kClusterLost);
      const auto message = "cluster " + e.cluster_id + " lost";
      if (rec.state == QueryState::kRunning) {
        // Already executing: the work is gone with the cluster.
        fail_locked(rec, code, message, e.at);
      } else {
        lose_locked(rec, code, message, e.at);
      }
      break;
    }
  }
}

void Gateway::advance_locked(Seconds t) {
  t = std::max(t, processed_until_);
  for (;;) {
    const auto next_event = sim_.next_event_time();
    if (next_event && *next_event <= t && *next_event <= next_probe_) {
      for (const auto& e : sim_.advance_to(*next_event)) {
        handle_event(e);
      }
      continue;
    }
    if (next_probe_ <= t) {
      registry_.probe_all(
          [this](const cluster::ClusterDescriptor& d) { return sim_.probe(d.id); },
          next_probe_);
      next_probe_ += options_.probe.interval;
      continue;
    }
    break;
  }
  for (const auto& e : sim_.advance_to(t)) {
    handle_event(e);
  }
  processed_until_ = t;
}

QueryRecord Gateway::submit_query(std::string sql_text) {
  std::lock_guard lock(mu_);
  const auto now = clock_.now();
  advance_locked(now);

  QueryRecord fresh;
  fresh.id = next_id_locked(now);
  fresh.raw_sql = std::move(sql_text);
  fresh.submit_time = now;
  auto& rec = records_.emplace(fresh.id, std::move(fresh)).first->second;
  transition_locked(rec, QueryState::kQueued, now);

  sql::ParsedQuery q;
  try {
    q = sql::parse_query(rec.raw_sql);
  } catch (const Error& e) {
    fail_locked(rec, e.code(), e.what(), now);
    return rec;
  }
  rec.statement_class = q.statement_class;
  for (const auto& t : q.tables) {
    rec.tables.push_back(t.qualified_name());
  }
  rec.estimate = model_.predict(cost::extract_features(q, *catalog_));
  rec.resource_class =
      cost::classify(rec.estimate, options_.policy.heavy_threshold_bytes);
  dispatch_locked(rec, q, now);
  return rec;
}

QueryRecord Gateway::get_query(std::string_view id) {
  std::lock_guard lock(mu_);
  advance_locked(clock_.now());
  auto it = records_.find(std::string(id));
  if (it == records_.end()) {
    throw Error(ErrorCode::kNotFound, "no query with id '" + std::string(id) + "'");
  }
  return it->second;
}

std::vector<QueryRecord> Gateway::records() {
  std::lock_guard lock(mu_);
  advance_locked(clock_.now());
  std::vector<QueryRecord> out;
  out.reserve(records_.size());
  for (const auto& [id, rec] : records_) {
    out.push_back(rec);
  }
  return out;
}

AggregatedStats Gateway::aggregated_stats() {
  std::lock_guard lock(mu_);
  const auto now = clock_.now();
  advance_locked(now);
  AggregatedStats s;
  s.at = processed_until_;
  s.clusters = sim_.all_stats();
  std::vector<double> durations;
  for (const auto& c : s.clusters) {
    s.total_running_queries += c.running_queries;
    s.total_queued_queries += c.queued_queries;
    s.total_active_workers += c.active_workers;
    s.total_memory_used_bytes += c.memory_used_bytes;
    s.total_memory_pool_bytes += c.memory_pool_bytes;
    durations.insert(durations.end(), c.recent_durations.begin(),
                     c.recent_durations.end());
  }
  s.p90_execution_seconds = sim::percentile(std::move(durations), 90.0);
  for (const auto& [id, rec] : records_) {
    ++s.records_by_state[rec.state];
  }
  s.failed_count = s.records_by_state[QueryState::kFailed];
  s.log_healthy = log_ == nullptr || log_->healthy();
  return s;
}

cluster::RegistrySnapshot Gateway::clusters() {
  std::lock_guard lock(mu_);
  advance_locked(clock_.now());
  return registry_.snapshot();
}

void Gateway::pump() {
  std::lock_guard lock(mu_);
  advance_locked(clock_.now());
}

Seconds Gateway::next_wakeup() {
  std::lock_guard lock(mu_);
  const auto next_event = sim_.next_event_time();
  return next_event ? std::min(*next_event, next_probe_) : next_probe_;
}

std::optional<Seconds> Gateway::next_sim_event() {
  std::lock_guard lock(mu_);
  return sim_.next_event_time();
}

std::size_t Gateway::open_count() {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [](const auto& kv) { return !is_terminal(kv.second.state); }));
}

} // namespace fedgate::gateway
