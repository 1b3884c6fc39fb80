#include <doctest.h>

#include "bpmm/mpengine.hpp"
#include "bpmm/schedulers.hpp"
#include "helpers.hpp"

using namespace bpmm;
using testing::bare_topology;

TEST_CASE("two-node instance decodes the only useful transmitter") {
  Topology t = bare_topology(2);
  t.connect_with_snr(0, 1, 100.0, 100.0);
  t.add_flow({0}, {1});
  QueueMatrix q = make_queues(t);
  q(0, 0) = 5.0;
  const WeightContext ctx(t, q);
  for (PowerPolicy p : {PowerPolicy::Waterfilling, PowerPolicy::SplitPower, PowerPolicy::OverPower, PowerPolicy::SingleDest}) {
    const MpResult r = run_mp(ctx, p);
    CHECK(r.schedule.roles == bit(0));
    CHECK(r.termination != MpTermination::IterationCap);
  }
  MpConfig pairwise;
  pairwise.factorization = Factorization::Pairwise;
  CHECK(run_mp(ctx, PowerPolicy::SplitPower, pairwise).schedule.roles == bit(0));
  CHECK_THROWS_AS(run_mp(ctx, PowerPolicy::Waterfilling, pairwise), std::invalid_argument);
}

TEST_CASE("empty queues decode to silence") {
  std::mt19937_64 rng(3);
  Topology t = testing::random_network(6, 0.3, rng);
  testing::add_random_flows(t, 3, rng);
  const MpResult r = run_mp(WeightContext(t, make_queues(t)), PowerPolicy::Waterfilling);
  CHECK(r.schedule.roles == 0);
  CHECK(r.schedule.weight == 0.0);
  CHECK(r.termination == MpTermination::Converged);
}

TEST_CASE("factor value") {
  Topology t = bare_topology(3);
  t.connect_with_snr(0, 1, 10.0, 10.0);
  t.connect_with_snr(0, 2, 10.0, 10.0);
  t.add_flow({0}, {1});
  t.add_flow({0}, {2});
  QueueMatrix q = make_queues(t);
  q(0, 0) = 2.0;
  q(0, 1) = 3.0;
  // Match the source queues at the other receiver so each link carries
  // exactly one flow's pressure.
  q(2, 0) = 2.0;
  q(1, 1) = 3.0;
  const WeightContext ctx(t, q);
  const double c = t.link(t.link_id(0, 1)).chan.cap_full_power;
  // A silent node contributes nothing whatever its neighbors do.
  CHECK(factor_value(ctx, 0, 0, PowerPolicy::OverPower) == 0.0);
  CHECK(factor_value(ctx, 0, bit(1) | bit(2), PowerPolicy::OverPower) == 0.0);
  // Transmitting neighbors cannot receive.
  CHECK(factor_value(ctx, 0, bit(0), PowerPolicy::OverPower) == doctest::Approx(5.0 * c));
  CHECK(factor_value(ctx, 0, bit(0) | bit(2), PowerPolicy::OverPower) == doctest::Approx(2.0 * c));
  CHECK(factor_value(ctx, 0, bit(0) | bit(1) | bit(2), PowerPolicy::OverPower) == 0.0);
  CHECK(factor_value(ctx, 0, bit(0), PowerPolicy::SingleDest) == doctest::Approx(3.0 * c));
  CHECK(factor_value(ctx, 0, bit(0), PowerPolicy::Waterfilling) ==
        doctest::Approx(ctx.weight(bit(0), PowerPolicy::Waterfilling)));
}

TEST_CASE("structured and generic kernels agree") {
  std::mt19937_64 rng(13);
  for (int inst = 0; inst < 30; ++inst) {
    Topology t = testing::random_network(3 + static_cast<int>(rng() % 7), 0.35, rng);
    testing::add_random_flows(t, 3, rng);
    const QueueMatrix q = testing::random_queues(t, rng);
    const WeightContext ctx(t, q);
    for (PowerPolicy p : {PowerPolicy::Waterfilling, PowerPolicy::SplitPower, PowerPolicy::OverPower, PowerPolicy::SingleDest}) {
      MpConfig structured, generic;
      generic.kernel = MpKernel::Generic;
      const MpResult a = run_mp(ctx, p, structured);
      const MpResult b = run_mp(ctx, p, generic);
      CHECK(a.schedule.roles == b.schedule.roles);
      CHECK(a.iterations == b.iterations);
      CHECK(a.termination == b.termination);
    }
  }
}

TEST_CASE("decoded schedules are feasible and never beat the exact search") {
  std::mt19937_64 rng(17);
  for (int inst = 0; inst < 40; ++inst) {
    Topology t = testing::random_network(3 + static_cast<int>(rng() % 7), 0.35, rng);
    testing::add_random_flows(t, 4, rng);
    const QueueMatrix q = testing::random_queues(t, rng);
    const WeightContext ctx(t, q);
    for (PowerPolicy p : {PowerPolicy::Waterfilling, PowerPolicy::SplitPower, PowerPolicy::OverPower}) {
      MpConfig cfg;
      cfg.max_iters = 40;
      const MpResult r = run_mp(ctx, p, cfg);
      CHECK(r.iterations <= cfg.max_iters);
      CHECK(r.schedule.weight == doctest::Approx(ctx.weight(r.schedule.roles, p)).epsilon(1e-12));
      CHECK(r.schedule.weight <= exact_mbp(ctx, p).weight * (1.0 + 1e-12));
      CHECK(audit(r.schedule, t, p == PowerPolicy::OverPower).empty());
    }
  }
}

TEST_CASE("pairwise messages are exact on trees") {
  std::mt19937_64 rng(19);
  for (int inst = 0; inst < 40; ++inst) {
    Topology t = testing::random_network(3 + static_cast<int>(rng() % 8), 0.0, rng);
    testing::add_random_flows(t, 3, rng);
    const QueueMatrix q = testing::random_queues(t, rng);
    const WeightContext ctx(t, q);
    MpConfig cfg;
    cfg.factorization = Factorization::Pairwise;
    for (PowerPolicy p : {PowerPolicy::SplitPower, PowerPolicy::OverPower}) {
      const MpResult r = run_mp(ctx, p, cfg);
      CHECK(r.schedule.weight == doctest::Approx(exact_mbp(ctx, p).weight).epsilon(1e-9));
    }
  }
}

TEST_CASE("mp option names") {
  CHECK(parse_factorization(to_string(Factorization::Pairwise)) == Factorization::Pairwise);
  CHECK(parse_mp_kernel(to_string(MpKernel::Generic)) == MpKernel::Generic);
  CHECK_THROWS(parse_factorization("loopy"));
  MpConfig bad;
  bad.max_iters = 0;
  Topology t = bare_topology(2);
  t.connect_with_snr(0, 1, 1.0, 1.0);
  t.add_flow({0}, {1});
  CHECK_THROWS_AS(run_mp(WeightContext(t, make_queues(t)), PowerPolicy::Waterfilling, bad), std::invalid_argument);
}
