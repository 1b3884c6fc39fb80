#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bpmm/sim.hpp"
#include "helpers.hpp"

using namespace bpmm;
using testing::bare_topology;

namespace {

Topology small_mesh(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Topology t = testing::random_network(6, 0.3, rng);
  testing::add_random_flows(t, 3, rng);
  return t;
}

}  // namespace

TEST_CASE("single bottleneck link delivers its capacity") {
  Topology t = bare_topology(2);
  t.connect_with_snr(0, 1, testing::snr_for_rate(1e6), testing::snr_for_rate(1e6));
  t.add_flow({0}, {1});
  SimConfig cfg;
  cfg.frames = 10000;
  const SummaryMetrics m = run(t, cfg);
  const double c = t.link(0).chan.cap_full_power;
  CHECK(c == doctest::Approx(1e6));
  CHECK(m.flow_rates[0] >= 0.98 * c);
  CHECK(m.flow_rates[0] <= c * (1.0 + 1e-12));
  CHECK(m.utility.value == doctest::Approx(0.5 * std::log(m.flow_rates[0])));
}

TEST_CASE("one frame delivers nothing") {
  const Topology t = small_mesh(1);
  SimConfig cfg;
  cfg.frames = 1;
  const SummaryMetrics m = run(t, cfg);
  CHECK(m.delivered_total == 0.0);
  CHECK(m.final_queue_total == doctest::Approx(m.injected_total));
  CHECK(m.injected_total > 0.0);
}

TEST_CASE("runs are deterministic and conserve bits") {
  for (SchedulerKind kind : {SchedulerKind::ExactMBP, SchedulerKind::MFWPAC, SchedulerKind::MFWMP, SchedulerKind::MWM}) {
    for (ArrivalMode mode : {ArrivalMode::Fluid, ArrivalMode::Poisson}) {
      const Topology t = small_mesh(2);
      SimConfig cfg;
      cfg.frames = 1500;
      cfg.scheduler = kind;
      cfg.arrival_mode = mode;
      cfg.seed = 9;
      std::uint64_t observed = 0;
      const SummaryMetrics a = run(t, cfg, [&](const FrameRecord& rec) {
        CHECK(rec.frame == ++observed);  // frames count from 1
        CHECK(rec.queues->minCoeff() >= 0.0);
        CHECK(key_hash(schedule_key(*rec.schedule, t)) == rec.key_hash);
      });
      const SummaryMetrics b = run(t, cfg);
      CHECK(observed == cfg.frames);
      CHECK(a.sum_rate == b.sum_rate);
      CHECK(a.histogram == b.histogram);
      CHECK(a.final_max_queue == b.final_max_queue);
      CHECK(a.delivered_total + a.final_queue_total == doctest::Approx(a.injected_total).epsilon(1e-9));
      std::uint64_t total = 0;
      for (const auto& [key, count] : a.histogram) total += count;
      CHECK(total == cfg.frames);
      CHECK(a.sample_frames.size() == cfg.frames / cfg.record_interval);
      CHECK(a.sample_max_queue.size() == a.sample_frames.size());
      CHECK(std::accumulate(a.flow_rates.begin(), a.flow_rates.end(), 0.0) == doctest::Approx(a.sum_rate));
    }
  }
}

TEST_CASE("different seeds differ under Poisson arrivals") {
  const Topology t = small_mesh(3);
  SimConfig cfg;
  cfg.frames = 500;
  cfg.arrival_mode = ArrivalMode::Poisson;
  cfg.seed = 1;
  const double first = run(t, cfg).injected_total;
  cfg.seed = 2;
  CHECK(run(t, cfg).injected_total != first);
}

TEST_CASE("coverage95") {
  CHECK(coverage95({100, 50, 30, 20}) == 4);
  CHECK(coverage95({20, 100, 30, 50}) == 4);
  CHECK(coverage95({95, 5}) == 1);
  CHECK(coverage95({1}) == 1);
  CHECK(coverage95({}) == 0);
}

TEST_CASE("utility") {
  CHECK(utility({1.0, std::exp(2.0)}).value == doctest::Approx(1.0));
  const UtilityReport starved = utility({3.0, 0.0, 2.0, 0.0});
  CHECK(std::isinf(starved.value));
  CHECK(starved.value < 0.0);
  CHECK(starved.starved_flows == std::vector<int>{1, 3});
  CHECK_THROWS(utility({-1.0}));
}

TEST_CASE("schedule keys") {
  Topology t = bare_topology(3);
  t.connect_with_snr(0, 1, 10.0, 10.0);
  t.connect_with_snr(1, 2, 10.0, 10.0);
  Schedule idle;
  idle.power.assign(static_cast<std::size_t>(t.num_links()), 0.0);
  CHECK(schedule_key(idle, t) == "idle");
  Schedule s = idle;
  s.roles = bit(1);
  s.power[static_cast<std::size_t>(t.link_id(1, 2))] = 0.7;
  s.power[static_cast<std::size_t>(t.link_id(1, 0))] = 1e-12;  // below the key resolution
  CHECK(schedule_key(s, t) == "010|1>2");
  CHECK(key_hash("") == 0xcbf29ce484222325ULL);
  CHECK(key_hash("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("linear slope") {
  CHECK(linear_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
  CHECK(linear_slope({1, 1}, {0, 5}) == 0.0);
  CHECK_THROWS(linear_slope({1}, {1}));
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.frames = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.frames = 10;
  cfg.v = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
