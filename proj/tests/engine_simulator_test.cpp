#include "fedgate/engine_simulator.hpp"

#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"

using namespace fedgate;
using namespace fedgate::sim;
using fedgate::testing::descriptor;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kNotFound;
}

ExecutionProfile profile(double seconds, std::uint64_t memory = 1ULL << 30) {
  return {seconds, memory};
}

std::vector<std::string> started_ids(const std::vector<SimEvent>& events) {
  std::vector<std::string> out;
  for (const auto& e : events) {
    if (e.kind == EventKind::kStarted) {
      out.push_back(e.query_id);
    }
  }
  return out;
}

} // namespace

TEST_CASE("sample_profile") {
  std::mt19937_64 rng(1);
  WorkloadMixture only_short;
  only_short.bands = {{1.0, 1, 60}, {0.0, 60, 300}, {0.0, 300, 7200}};
  for (int i = 0; i < 2000; ++i) {
    auto p = sample_profile({0, 1ULL << 30}, only_short, rng);
    CHECK(p.duration_seconds >= 1.0);
    CHECK(p.duration_seconds <= 60.0);
  }

  CHECK(sample_profile({0, 0}, {}, rng).actual_memory_bytes == kMinQueryMemoryBytes);

  // 10^5 draws: the share under 60s has standard deviation
  // sqrt(0.7*0.3/1e5) ~ 0.00145, so [0.68, 0.72] is a ~14 sigma band.
  for (std::uint64_t seed : {7ULL, 8ULL}) {
    std::mt19937_64 r(seed);
    int under_minute = 0;
    int over_five = 0;
    const WorkloadMixture mix;
    for (int i = 0; i < 100000; ++i) {
      auto p = sample_profile({0, 1ULL << 30}, mix, r);
      under_minute += p.duration_seconds < 60.0;
      over_five += p.duration_seconds > 300.0;
      REQUIRE(p.duration_seconds > 0.0);
      REQUIRE(p.duration_seconds <= 7200.0);
    }
    CHECK(under_minute / 1e5 >= 0.68);
    CHECK(under_minute / 1e5 <= 0.72);
    CHECK(over_five / 1e5 == doctest::Approx(0.1).epsilon(0.1));
  }

  // Lognormal noise has median 1.
  std::vector<double> ratios;
  for (int i = 0; i < 20001; ++i) {
    ratios.push_back(
        static_cast<double>(sample_profile({0, 1ULL << 40}, {}, rng).actual_memory_bytes) /
        static_cast<double>(1ULL << 40));
  }
  CHECK(*percentile(ratios, 50) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("invalid mixtures") {
  std::mt19937_64 rng(1);
  WorkloadMixture m;
  m.bands = {{0.5, 1, 60}, {0.2, 60, 300}};
  CHECK(code_of([&] { sample_profile({}, m, rng); }) == ErrorCode::kInvalidMixture);
  m.bands = {{1.2, 1, 60}, {-0.2, 60, 300}};
  CHECK(code_of([&] { validate(m); }) == ErrorCode::kInvalidMixture);
  m.bands = {{1.0, 60, 1}};
  CHECK(code_of([&] { validate(m); }) == ErrorCode::kInvalidMixture);
  m.bands = {{1.0, 0, 1}};
  CHECK(code_of([&] { validate(m); }) == ErrorCode::kInvalidMixture);
  m.bands = {};
  CHECK(code_of([&] { validate(m); }) == ErrorCode::kInvalidMixture);
  m = {};
  m.memory_sigma = -1;
  CHECK(code_of([&] { validate(m); }) == ErrorCode::kInvalidMixture);
}

TEST_CASE("uncontended query runs to completion") {
  EngineSimulator sim;
  sim.add_cluster(descriptor("a", "cloud"));
  auto adm = sim.submit("a", "q1", profile(12.5), Seconds(3));
  CHECK(adm.status == AdmissionStatus::kRunning);
  CHECK(sim.next_event_time() == Seconds(15.5));
  CHECK(sim.advance_to(Seconds(15)).empty());
  auto events = sim.advance_to(Seconds(20));
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == EventKind::kCompleted);
  CHECK(events[0].at == Seconds(15.5));
  CHECK(events[0].duration_seconds == 12.5);
  CHECK(sim.cluster_stats("a").completed_count == 1);
  CHECK(code_of([&] { sim.submit("zz", "q", profile(1), Seconds(20)); }) ==
        ErrorCode::kUnknownCluster);
}

TEST_CASE("memory limit") {
  EngineSimulator sim;
  sim.add_cluster(descriptor("a", "cloud", {"hive"}, 2, 1ULL << 30));
  auto adm = sim.submit("a", "big", profile(5, (2ULL << 30) + 1), Seconds(0));
  CHECK(adm.status == AdmissionStatus::kFailed);
  CHECK(adm.error == ErrorCode::kMemoryExceeded);
  auto s = sim.cluster_stats("a");
  CHECK(s.failed_count == 1);
  CHECK(s.running_queries == 0);
  CHECK(sim.submit("a", "fits", profile(5, 2ULL << 30), Seconds(0)).status ==
        AdmissionStatus::kRunning);
}

TEST_CASE("hand simulated FIFO schedule") {
  SUBCASE("one slot") {
    EngineSimulator sim({1, 512});
    sim.add_cluster(descriptor("a", "cloud", {"hive"}, 1));
    CHECK(sim.submit("a", "q1", profile(10), Seconds(0)).status == AdmissionStatus::kRunning);
    CHECK(sim.submit("a", "q2", profile(5), Seconds(1)).status == AdmissionStatus::kQueued);
    CHECK(sim.submit("a", "q3", profile(3), Seconds(2)).status == AdmissionStatus::kQueued);
    auto ev = sim.advance_to(Seconds(100));
    // q1 [0,10], q2 [10,15], q3 [15,18]
    REQUIRE(ev.size() == 5);
    auto at = [&](int i, double t, EventKind k, const char* id) {
      CHECK(ev[i].at == Seconds(t));
      CHECK(ev[i].kind == k);
      CHECK(ev[i].query_id == id);
    };
    at(0, 10, EventKind::kCompleted, "q1");
    at(1, 10, EventKind::kStarted, "q2");
    at(2, 15, EventKind::kCompleted, "q2");
    at(3, 15, EventKind::kStarted, "q3");
    at(4, 18, EventKind::kCompleted, "q3");
  }
  SUBCASE("memory head-of-line blocking") {
    // Two slots, 100 bytes of pool. q3 would fit next to q1 but waits for q2.
    EngineSimulator sim({2, 512});
    sim.add_cluster(descriptor("a", "cloud", {"hive"}, 1, 100));
    CHECK(sim.submit("a", "q1", profile(10, 60), Seconds(0)).status == AdmissionStatus::kRunning);
    CHECK(sim.submit("a", "q2", profile(5, 60), Seconds(0)).status == AdmissionStatus::kQueued);
    CHECK(sim.submit("a", "q3", profile(1, 10), Seconds(0)).status == AdmissionStatus::kQueued);
    auto ev = sim.advance_to(Seconds(100));
    REQUIRE(ev.size() == 5);
    CHECK(ev[0].query_id == "q1");
    CHECK(ev[1].kind == EventKind::kStarted);
    CHECK(ev[1].query_id == "q2");
    CHECK(ev[2].kind == EventKind::kStarted);
    CHECK(ev[2].query_id == "q3");
    CHECK(ev[2].at == Seconds(10));
    CHECK(ev[3].query_id == "q3");
    CHECK(ev[3].at == Seconds(11));
    CHECK(ev[4].query_id == "q2");
    CHECK(ev[4].at == Seconds(15));
  }
}

TEST_CASE("failure injection") {
  EngineSimulator sim({1, 512});
  sim.add_cluster(descriptor("a", "cloud", {"hive"}, 2));
  sim.submit("a", "q1", profile(100), Seconds(0));
  sim.submit("a", "q2", profile(100), Seconds(0));
  CHECK(sim.probe("a"));
  auto ev = sim.inject_failure("a", Seconds(5));
  REQUIRE(ev.size() == 2);
  for (const auto& e : ev) {
    CHECK(e.kind == EventKind::kFailed);
    CHECK(e.error == ErrorCode::kClusterLost);
    CHECK(e.at == Seconds(5));
  }
  CHECK_FALSE(sim.probe("a"));
  auto s = sim.cluster_stats("a");
  CHECK(s.active_workers == 0);
  CHECK(s.failed_count == 2);
  CHECK(s.memory_used_bytes == 0);
  CHECK(code_of([&] { sim.submit("a", "q3", profile(1), Seconds(6)); }) ==
        ErrorCode::kClusterUnreachable);
  sim.recover("a");
  CHECK(sim.probe("a"));
  CHECK(sim.cluster_stats("a").active_workers == 2);
  CHECK(code_of([&] { sim.inject_failure("zz", Seconds(0)); }) ==
        ErrorCode::kUnknownCluster);
  CHECK(code_of([&] { sim.probe("zz"); }) == ErrorCode::kUnknownCluster);
}

TEST_CASE("stats") {
  EngineSimulator sim;
  sim.add_cluster(descriptor("a", "cloud", {"hive"}, 3, 10));
  auto s = sim.cluster_stats("a");
  CHECK(s.submitted == 0);
  CHECK(s.running_queries == 0);
  CHECK(s.queued_queries == 0);
  CHECK(s.completed_count == 0);
  CHECK(s.failed_count == 0);
  CHECK(s.memory_used_bytes == 0);
  CHECK(s.memory_pool_bytes == 30);
  CHECK(s.active_workers == 3);
  CHECK_FALSE(s.p90_duration());

  CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 90) == 9.0);
  CHECK(percentile({5}, 90) == 5.0);
  CHECK(percentile({3, 1, 2}, 90) == 3.0);

  EngineSimulator windowed({4, 4});
  windowed.add_cluster(descriptor("a", "cloud", {"hive"}, 4, 1ULL << 40));
  for (int i = 1; i <= 6; ++i) {
    windowed.submit("a", "q" + std::to_string(i), profile(i), Seconds(0));
  }
  windowed.advance_to(Seconds(10));
  auto w = windowed.cluster_stats("a");
  CHECK(w.completed_count == 6);
  CHECK(w.recent_durations == std::vector<double>{3, 4, 5, 6});
  CHECK(w.p90_duration() == 6.0);
}

namespace {

struct TraceStep {
  double at;
  int cluster;
  int action; // 0..7 submit, 8 fail, 9 recover
  ExecutionProfile profile;
};

std::vector<TraceStep> random_trace(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<TraceStep> steps;
  double t = 0;
  for (int i = 0; i < n; ++i) {
    t += std::exponential_distribution<double>(0.5)(rng);
    steps.push_back({t, static_cast<int>(rng() % 3), static_cast<int>(rng() % 10),
                     profile(1 + static_cast<double>(rng() % 40),
                             1 + rng() % (300ULL << 30))});
  }
  return steps;
}

struct RunResult {
  std::vector<SimEvent> events;
  std::vector<ClusterStats> stats;
};

bool same_events(const std::vector<SimEvent>& a, const std::vector<SimEvent>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].at != b[i].at || a[i].kind != b[i].kind ||
        a[i].cluster_id != b[i].cluster_id || a[i].query_id != b[i].query_id ||
        a[i].error != b[i].error || a[i].duration_seconds != b[i].duration_seconds) {
      return false;
    }
  }
  return true;
}

RunResult run_trace(const std::vector<TraceStep>& steps) {
  EngineSimulator sim({2, 512});
  const std::vector<std::string> ids = {"c0", "c1", "c2"};
  for (const auto& id : ids) {
    sim.add_cluster(descriptor(id, "cloud", {"hive"}, 2, 128ULL << 30));
  }
  RunResult r;
  std::map<std::string, std::vector<std::string>> submit_order;
  int qn = 0;
  auto check_conservation = [&] {
    for (const auto& s : sim.all_stats()) {
      REQUIRE(s.submitted ==
              s.running_queries + s.queued_queries + s.completed_count + s.failed_count);
      REQUIRE(s.memory_used_bytes <= s.memory_pool_bytes);
      REQUIRE(s.running_queries <= 2 * 2);
    }
  };
  for (const auto& step : steps) {
    auto ev = sim.advance_to(Seconds(step.at));
    r.events.insert(r.events.end(), ev.begin(), ev.end());
    check_conservation();
    const auto& id = ids[step.cluster];
    if (step.action == 8) {
      ev = sim.inject_failure(id, Seconds(step.at));
      r.events.insert(r.events.end(), ev.begin(), ev.end());
    } else if (step.action == 9) {
      sim.recover(id);
    } else {
      const std::string q = "q" + std::to_string(qn++);
      try {
        auto adm = sim.submit(id, q, step.profile, Seconds(step.at));
        if (adm.status != AdmissionStatus::kFailed) {
          submit_order[id].push_back(q);
        }
        if (adm.status == AdmissionStatus::kRunning) {
          r.events.push_back({Seconds(step.at), EventKind::kStarted, id, q, {}, 0});
        }
      } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::kClusterUnreachable);
      }
    }
    check_conservation();
  }
  auto tail = sim.advance_to(Seconds(1e9));
  r.events.insert(r.events.end(), tail.begin(), tail.end());
  check_conservation();
  r.stats = sim.all_stats();

  // FIFO: per cluster, queries start in submission order.
  for (const auto& cid : ids) {
    std::vector<std::string> started;
    for (const auto& e : r.events) {
      if (e.cluster_id == cid && e.kind == EventKind::kStarted) {
        started.push_back(e.query_id);
      }
    }
    const auto& order = submit_order[cid];
    CHECK(started.size() <= order.size());
    // Queries lost while queued never start, so compare as a subsequence.
    std::size_t j = 0;
    for (const auto& q : order) {
      if (j < started.size() && started[j] == q) {
        ++j;
      }
    }
    CHECK(j == started.size());
  }
  return r;
}

} // namespace

TEST_CASE("conservation, memory safety, FIFO and determinism") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto steps = random_trace(seed, 300);
    auto a = run_trace(steps);
    auto b = run_trace(steps);
    CHECK(same_events(a.events, b.events));
    CHECK(a.stats == b.stats);
  }
}

TEST_CASE("started events only name submitted queries") {
  EngineSimulator sim({1, 8});
  sim.add_cluster(descriptor("a", "cloud", {"hive"}, 1));
  sim.submit("a", "x", profile(1), Seconds(0));
  sim.submit("a", "y", profile(1), Seconds(0));
  CHECK(started_ids(sim.advance_to(Seconds(5))) == std::vector<std::string>{"y"});
  auto lost = sim.remove_cluster("a", Seconds(5));
  CHECK(lost.empty());
  CHECK_FALSE(sim.has_cluster("a"));
}
