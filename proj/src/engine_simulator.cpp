#include "fedgate/engine_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedgate::sim {

void validate(const WorkloadMixture& mix) {
  if (mix.bands.empty()) {
    throw Error(ErrorCode::kInvalidMixture, "mixture has no duration bands");
  }
  double sum = 0.0;
  for (const auto& b : mix.bands) {
    if (!std::isfinite(b.weight) || b.weight < 0.0) {
      throw Error(ErrorCode::kInvalidMixture, "band weight must be non-negative");
    }
    if (!(b.min_seconds > 0.0) || !(b.max_seconds >= b.min_seconds) ||
        !std::isfinite(b.max_seconds)) {
      throw Error(ErrorCode::kInvalidMixture,
                  "band bounds must satisfy 0 < min <= max");
    }
    sum += b.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidMixture,
                "band weights sum to " + std::to_string(sum) + ", not 1");
  }
  if (!std::isfinite(mix.memory_sigma) || mix.memory_sigma < 0.0) {
    throw Error(ErrorCode::kInvalidMixture, "memory sigma must be non-negative");
  }
}

ExecutionProfile sample_profile(const cost::CostEstimate& estimate,
                                const WorkloadMixture& mix, std::mt19937_64& rng) {
  validate(mix);
  const double pick = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const DurationBand* band = nullptr;
  double acc = 0.0;
  for (const auto& b : mix.bands) {
    acc += b.weight;
    if (b.weight > 0.0) {
      band = &b;
      if (pick < acc) {
        break;
      }
    }
  }
  ExecutionProfile p;
  p.duration_seconds =
      band->min_seconds == band->max_seconds
          ? band->min_seconds
          : std::uniform_real_distribution<double>(band->min_seconds,
                                                   band->max_seconds)(rng);
  const double noise =
      std::lognormal_distribution<double>(0.0, mix.memory_sigma)(rng);
  const long double mem =
      static_cast<long double>(estimate.peak_memory_bytes) * noise;
  if (mem >= 1.8e19L) {
    p.actual_memory_bytes = ~0ULL;
  } else {
    p.actual_memory_bytes = std::max<std::uint64_t>(
        kMinQueryMemoryBytes, static_cast<std::uint64_t>(std::llroundl(mem)));
  }
  return p;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kStarted:
      return "STARTED";
    case EventKind::kCompleted:
      return "COMPLETED";
    case EventKind::kFailed:
      return "FAILED";
  }
  return "STARTED";
}

std::optional<double> percentile(std::vector<double> values, double p) {
  if (values.empty()) {
    return std::nullopt;
  }
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::optional<double> ClusterStats::p90_duration() const {
  return percentile(recent_durations, 90.0);
}

class SimCluster {
 public:
  SimCluster(cluster::ClusterDescriptor d, SimSettings s)
      : desc(std::move(d)), settings(s) {}

  const cluster::ClusterDescriptor desc;
  const SimSettings settings;
  mutable std::mutex mu;

  struct Running {
    std::string query_id;
    Seconds end;
    std::uint64_t memory;
    double duration;
    std::uint64_t seq;
  };
  struct Waiting {
    std::string query_id;
    ExecutionProfile profile;
  };

  std::vector<Running> running;
  std::deque<Waiting> queue;
  std::vector<SimEvent> outbox;
  std::deque<double> window;
  std::uint64_t memory_used = 0;
  std::uint64_t submitted = 0;
  std::uint64_t completed = 0;
  std::uint64_t failed_count = 0;
  std::uint64_t seq = 0;
  bool failed = false;

  std::size_t slots() const {
    return static_cast<std::size_t>(desc.worker_count) *
           static_cast<std::size_t>(settings.slots_per_worker);
  }

  bool fits(std::uint64_t memory) const {
    return running.size() < slots() &&
           memory <= desc.memory_pool_bytes() - memory_used;
  }

  void check_invariants() const {
    if (memory_used > desc.memory_pool_bytes() || running.size() > slots()) {
      throw std::logic_error("simulated cluster " + desc.id +
                             " over its memory pool or slots");
    }
    if (submitted != running.size() + queue.size() + completed + failed_count) {
      throw std::logic_error("simulated cluster " + desc.id +
                             " lost track of a query");
    }
  }

  void start(std::string query_id, const ExecutionProfile& p, Seconds at) {
    memory_used += p.actual_memory_bytes;
    running.push_back({std::move(query_id), at + Seconds(p.duration_seconds),
                       p.actual_memory_bytes, p.duration_seconds, seq++});
  }

  void admit_queued(Seconds at) {
    while (!queue.empty() && fits(queue.front().profile.actual_memory_bytes)) {
      auto w = std::move(queue.front());
      queue.pop_front();
      outbox.push_back({at, EventKind::kStarted, desc.id, w.query_id, {}, 0.0});
      start(std::move(w.query_id), w.profile, at);
      check_invariants();
    }
  }

  std::vector<Running>::iterator next_completion() {
    return std::min_element(running.begin(), running.end(),
                            [](const Running& a, const Running& b) {
                              return std::pair(a.end, a.seq) < std::pair(b.end, b.seq);
                            });
  }

  void run_until(Seconds t) {
    while (!running.empty()) {
      auto it = next_completion();
      if (it->end > t) {
        break;
      }
      Running done = std::move(*it);
      running.erase(it);
      memory_used -= done.memory;
      ++completed;
      window.push_back(done.duration);
      while (window.size() > settings.duration_window) {
        window.pop_front();
      }
      outbox.push_back({done.end, EventKind::kCompleted, desc.id,
                        done.query_id, {}, done.duration});
      check_invariants();
      admit_queued(done.end);
    }
  }

  void fail_everything(Seconds at) {
    for (auto& r : running) {
      outbox.push_back({at, EventKind::kFailed, desc.id, r.query_id,
                        ErrorCode::kClusterLost, 0.0});
    }
    for (auto& w : queue) {
      outbox.push_back({at, EventKind::kFailed, desc.id, w.query_id,
                        ErrorCode::kClusterLost, 0.0});
    }
    failed_count += running.size() + queue.size();
    running.clear();
    queue.clear();
    memory_used = 0;
    check_invariants();
  }

  std::vector<SimEvent> drain() {
    std::vector<SimEvent> out;
    out.swap(outbox);
    return out;
  }

  ClusterStats stats() const {
    ClusterStats s;
    s.cluster_id = desc.id;
    s.submitted = submitted;
    s.running_queries = running.size();
    s.queued_queries = queue.size();
    s.active_workers = failed ? 0 : desc.worker_count;
    s.memory_used_bytes = memory_used;
    s.memory_pool_bytes = desc.memory_pool_bytes();
    s.completed_count = completed;
    s.failed_count = failed_count;
    s.recent_durations.assign(window.begin(), window.end());
    return s;
  }
};

EngineSimulator::EngineSimulator(SimSettings settings) : settings_(settings) {
  if (settings_.slots_per_worker <= 0 || settings_.duration_window == 0) {
    throw std::invalid_argument("slots_per_worker and duration_window must be positive");
  }
}

EngineSimulator::~EngineSimulator() = default;

void EngineSimulator::add_cluster(const cluster::ClusterDescriptor& desc) {
  cluster::validate(desc);
  std::unique_lock lock(mu_);
  for (const auto& c : clusters_) {
    if (c->desc.id == desc.id) {
      throw Error(ErrorCode::kDuplicateCluster,
                  "simulated cluster '" + desc.id + "' already exists");
    }
  }
  clusters_.push_back(std::make_shared<SimCluster>(desc, settings_));
}

std::vector<SimEvent> EngineSimulator::remove_cluster(std::string_view id,
                                                      Seconds now) {
  std::shared_ptr<SimCluster> victim;
  {
    std::unique_lock lock(mu_);
    auto it = std::find_if(clusters_.begin(), clusters_.end(),
                           [&](const auto& c) { return c->desc.id == id; });
    if (it == clusters_.end()) {
      throw Error(ErrorCode::kUnknownCluster,
                  "unknown cluster '" + std::string(id) + "'");
    }
    victim = *it;
    clusters_.erase(it);
  }
  std::lock_guard lock(victim->mu);
  victim->run_until(now);
  victim->fail_everything(now);
  return victim->drain();
}

bool EngineSimulator::has_cluster(std::string_view id) const {
  std::shared_lock lock(mu_);
  return std::any_of(clusters_.begin(), clusters_.end(),
                     [&](const auto& c) { return c->desc.id == id; });
}

std::shared_ptr<SimCluster> EngineSimulator::find(std::string_view id) const {
  std::shared_lock lock(mu_);
  for (const auto& c : clusters_) {
    if (c->desc.id == id) {
      return c;
    }
  }
  throw Error(ErrorCode::kUnknownCluster, "unknown cluster '" + std::string(id) + "'");
}

Admission EngineSimulator::submit(std::string_view cluster_id, std::string query_id,
                                  const ExecutionProfile& profile, Seconds now) {
  if (!(profile.duration_seconds > 0.0) || profile.actual_memory_bytes == 0) {
    throw std::invalid_argument("execution profile must be positive");
  }
  auto c = find(cluster_id);
  std::lock_guard lock(c->mu);
  if (c->failed) {
    throw Error(ErrorCode::kClusterUnreachable,
                "cluster '" + c->desc.id + "' is unreachable");
  }
  c->run_until(now);
  ++c->submitted;
  if (profile.actual_memory_bytes > c->desc.memory_pool_bytes()) {
    ++c->failed_count;
    c->check_invariants();
    return {AdmissionStatus::kFailed, ErrorCode::kMemoryExceeded};
  }
  if (c->queue.empty() && c->fits(profile.actual_memory_bytes)) {
    c->start(std::move(query_id), profile, now);
    c->check_invariants();
    return {AdmissionStatus::kRunning, std::nullopt};
  }
  c->queue.push_back({std::move(query_id), profile});
  c->check_invariants();
  return {AdmissionStatus::kQueued, std::nullopt};
}

std::vector<SimEvent> EngineSimulator::advance_to(Seconds t) {
  std::vector<std::shared_ptr<SimCluster>> all;
  {
    std::shared_lock lock(mu_);
    all = clusters_;
  }
  std::vector<SimEvent> events;
  for (const auto& c : all) {
    std::lock_guard lock(c->mu);
    c->run_until(t);
    auto drained = c->drain();
    events.insert(events.end(), std::make_move_iterator(drained.begin()),
                  std::make_move_iterator(drained.end()));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.at < b.at; });
  return events;
}

std::optional<Seconds> EngineSimulator::next_event_time() const {
  std::vector<std::shared_ptr<SimCluster>> all;
  {
    std::shared_lock lock(mu_);
    all = clusters_;
  }
  std::optional<Seconds> best;
  for (const auto& c : all) {
    std::lock_guard lock(c->mu);
    for (const auto& e : c->outbox) {
      if (!best || e.at < *best) {
        best = e.at;
      }
    }
    for (const auto& r : c->running) {
      if (!best || r.end < *best) {
        best = r.end;
      }
    }
  }
  return best;
}

std::vector<SimEvent> EngineSimulator::inject_failure(std::string_view id,
                                                      Seconds now) {
  auto c = find(id);
  std::lock_guard lock(c->mu);
  c->run_until(now);
  c->fail_everything(now);
  c->failed = true;
  return c->drain();
}

void EngineSimulator::recover(std::string_view id) {
  auto c = find(id);
  std::lock_guard lock(c->mu);
  c->failed = false;
}

bool EngineSimulator::probe(std::string_view id) const {
  auto c = find(id);
  std::lock_guard lock(c->mu);
  return !c->failed;
}

ClusterStats EngineSimulator::cluster_stats(std::string_view id) const {
  auto c = find(id);
  std::lock_guard lock(c->mu);
  return c->stats();
}

std::vector<ClusterStats> EngineSimulator::all_stats() const {
  std::vector<std::shared_ptr<SimCluster>> all;
  {
    std::shared_lock lock(mu_);
    all = clusters_;
  }
  std::vector<ClusterStats> out;
  for (const auto& c : all) {
    std::lock_guard lock(c->mu);
    out.push_back(c->stats());
  }
  return out;
}

} // namespace fedgate::sim
