#include <doctest.h>

#include <map>
#include <string>

#include "bpmm/lp.hpp"
#include "bpmm/milp.hpp"
#include "bpmm/role_search.hpp"
#include "bpmm/schedulers.hpp"
#include "helpers.hpp"

using namespace bpmm;
using testing::bare_topology;

namespace {

std::string role_string(RoleMask m, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if (has_bit(m, i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

// Maximum weight, ties to the lexicographically smallest role string.
std::pair<RoleMask, double> brute_force_roles(const WeightContext& ctx, PowerPolicy policy) {
  const int n = ctx.num_nodes();
  double best = 0.0;
  for (RoleMask m = 0; m < (RoleMask{1} << n); ++m) best = std::max(best, ctx.weight(m, policy));
  const double threshold = best - 1e-9 * std::abs(best);
  std::string top;
  RoleMask pick = 0;
  for (RoleMask m = 0; m < (RoleMask{1} << n); ++m) {
    if (ctx.weight(m, policy) < threshold) continue;
    const std::string s = role_string(m, n);
    if (top.empty() || s < top) {
      top = s;
      pick = m;
    }
  }
  return {pick, best};
}

// Maximum-weight matching by enumerating edge subsets.
double brute_force_matching(const std::vector<std::tuple<int, int, double>>& edges) {
  double best = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << edges.size()); ++m) {
    std::uint64_t used = 0;
    double w = 0.0;
    bool ok = true;
    for (std::size_t e = 0; e < edges.size() && ok; ++e) {
      if (!((m >> e) & 1U)) continue;
      const auto [a, b, we] = edges[e];
      ok = !((used >> a) & 1U) && !((used >> b) & 1U);
      used |= (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
      w += we;
    }
    if (ok) best = std::max(best, w);
  }
  return best;
}

struct Instance {
  Topology topo;
  QueueMatrix q;
};

Instance random_instance(int n, std::mt19937_64& rng, double edge_p = 0.4) {
  Instance inst{testing::random_network(n, edge_p, rng), {}};
  testing::add_random_flows(inst.topo, 2 + static_cast<int>(rng() % 4), rng);
  inst.q = testing::random_queues(inst.topo, rng);
  return inst;
}

// Network where each link's back pressure equals its full-power weight
// divided by capacity: one flow per directed link toward its receiver.
Topology weighted_graph(int n, const std::vector<std::tuple<int, int, double>>& links, QueueMatrix& q) {
  Topology t = bare_topology(n);
  for (auto [a, b, w] : links)
    if (t.link_id(a, b) < 0) t.connect_with_snr(a, b, 10.0, 10.0);
  for (auto [a, b, w] : links) t.add_flow({a}, {b});
  q = make_queues(t);
  int f = 0;
  for (auto [a, b, w] : links) q(a, f++) = w / t.link(t.link_id(a, b)).chan.cap_full_power;
  return t;
}

}  // namespace

TEST_CASE("role search kernels agree with brute force") {
  std::mt19937_64 rng(21);
  for (int inst = 0; inst < 60; ++inst) {
    const Instance in = random_instance(2 + static_cast<int>(rng() % 9), rng);
    const WeightContext ctx(in.topo, in.q);
    for (PowerPolicy p : {PowerPolicy::Waterfilling, PowerPolicy::SplitPower, PowerPolicy::OverPower, PowerPolicy::SingleDest}) {
      const auto [roles, best] = brute_force_roles(ctx, p);
      for (SearchKernel k : {SearchKernel::Serial, SearchKernel::Parallel, SearchKernel::Pruned}) {
        const RoleSearchResult r = search_roles(ctx, p, k);
        CHECK(r.roles == roles);
        CHECK(r.weight == doctest::Approx(best).epsilon(1e-12));
        const RoleSearchResult hinted = search_roles(ctx, p, k, rng() & full_mask(ctx.num_nodes()));
        CHECK(hinted.roles == roles);
      }
    }
  }
  CHECK(parse_search_kernel("pruned") == SearchKernel::Pruned);
}

TEST_CASE("role search ties go to the lexicographically smallest vector") {
  // Symmetric pair: 0 -> 1 and 1 -> 0 with equal weight. Both (1,0) and
  // (0,1) tie; "01" < "10" so node 1 transmits.
  QueueMatrix q;
  const Topology t = weighted_graph(2, {{0, 1, 5.0}, {1, 0, 5.0}}, q);
  const WeightContext ctx(t, q);
  for (SearchKernel k : {SearchKernel::Serial, SearchKernel::Parallel, SearchKernel::Pruned})
    CHECK(search_roles(ctx, PowerPolicy::Waterfilling, k).roles == bit(1));
}

TEST_CASE("maximum weight matching") {
  QueueMatrix q;
  SUBCASE("triangle 3, 2, 1") {
    const Topology t = weighted_graph(3, {{0, 1, 3.0}, {1, 2, 2.0}, {2, 0, 1.0}}, q);
    const Schedule s = mwm(WeightContext(t, q));
    CHECK(s.weight == doctest::Approx(3.0));
    CHECK(s.power[static_cast<std::size_t>(t.link_id(0, 1))] == 1.0);
  }
  SUBCASE("path 5, 5") {
    const Topology t = weighted_graph(3, {{0, 1, 5.0}, {1, 2, 5.0}}, q);
    CHECK(mwm(WeightContext(t, q)).weight == doctest::Approx(5.0));
  }
  SUBCASE("no pressure") {
    Topology t = bare_topology(3);
    t.connect_with_snr(0, 1, 1.0, 1.0);
    t.add_flow({0}, {1});
    const Schedule s = mwm(WeightContext(t, make_queues(t)));
    CHECK(s.weight == 0.0);
    CHECK(s.roles == 0);
  }
  SUBCASE("random graphs against subset enumeration") {
    std::mt19937_64 rng(31);
    for (int inst = 0; inst < 80; ++inst) {
      const Instance in = random_instance(2 + static_cast<int>(rng() % 8), rng, 0.5);
      const WeightContext ctx(in.topo, in.q);
      std::map<std::pair<int, int>, double> pair_weight;
      for (int a = 0; a < ctx.num_nodes(); ++a)
        for (const LinkTerm& term : ctx.terms(a)) {
          auto& w = pair_weight[{std::min(a, term.rx), std::max(a, term.rx)}];
          w = std::max(w, term.w_full);
        }
      std::vector<std::tuple<int, int, double>> edges;
      for (auto [ab, w] : pair_weight) edges.emplace_back(ab.first, ab.second, w);
      const Schedule s = mwm(ctx);
      CHECK(s.weight == doctest::Approx(brute_force_matching(edges)).epsilon(1e-12));
      CHECK(audit(s, in.topo, false).empty());
    }
  }
}

TEST_CASE("single-destination brute force") {
  QueueMatrix q;
  SUBCASE("two nodes") {
    const Topology t = weighted_graph(2, {{0, 1, 4.0}}, q);
    CHECK(sfw_bruteforce(WeightContext(t, q)).roles == bit(0));
  }
  SUBCASE("star: the BS serves only its best UE") {
    const Topology t = weighted_graph(3, {{0, 1, 4.0}, {0, 2, 6.0}}, q);
    q(2, 0) = q(0, 0);
    q(1, 1) = q(0, 1);
    const Schedule s = sfw_bruteforce(WeightContext(t, q));
    CHECK(s.roles == bit(0));
    CHECK(s.power[static_cast<std::size_t>(t.link_id(0, 2))] == 1.0);
    CHECK(s.power[static_cast<std::size_t>(t.link_id(0, 1))] == 0.0);
    CHECK(s.weight == doctest::Approx(6.0));
  }
  SUBCASE("exhaustive limit") {
    const Topology t = weighted_graph(4, {{0, 1, 4.0}}, q);
    CHECK_THROWS_AS(sfw_bruteforce(WeightContext(t, q), 3), ExhaustiveLimitError);
    CHECK_THROWS_AS(exact_mbp(WeightContext(t, q), PowerPolicy::Waterfilling, 3), ExhaustiveLimitError);
  }
}

TEST_CASE("exact MBP") {
  QueueMatrix q;
  SUBCASE("only the hop into the destination carries pressure") {
    Topology t = bare_topology(4);
    t.connect_with_snr(0, 1, 10.0, 10.0);
    t.connect_with_snr(1, 2, 10.0, 10.0);
    t.connect_with_snr(0, 3, 10.0, 10.0);
    t.add_flow({1}, {2});
    QueueMatrix qq = make_queues(t);
    qq(0, 0) = qq(1, 0) = qq(3, 0) = 100.0;
    const Schedule s = exact_mbp(WeightContext(t, qq), PowerPolicy::Waterfilling);
    CHECK(s.roles == bit(1));
    CHECK(s.power[static_cast<std::size_t>(t.link_id(1, 2))] == doctest::Approx(1.0));
  }
  SUBCASE("no queues, no weight") {
    const Topology t = weighted_graph(3, {{0, 1, 1.0}}, q);
    const Schedule s = exact_mbp(WeightContext(t, make_queues(t)), PowerPolicy::Waterfilling);
    CHECK(s.weight == 0.0);
  }
}

TEST_CASE("scheduler weight dominance chain") {
  std::mt19937_64 rng(41);
  for (int inst = 0; inst < 60; ++inst) {
    const Instance in = random_instance(3 + static_cast<int>(rng() % 7), rng);
    const WeightContext ctx(in.topo, in.q);
    const double w_mwm = mwm(ctx).weight;
    const double w_sd = sfw_bruteforce(ctx).weight;
    const double w_wf = exact_mbp(ctx, PowerPolicy::Waterfilling).weight;
    const double w_sp = exact_mbp(ctx, PowerPolicy::SplitPower).weight;
    const Schedule lin_op = milp_schedule(ctx, PowerPolicy::OverPower);
    const Schedule lin_sp = milp_schedule(ctx, PowerPolicy::SplitPower);
    CHECK(w_sd >= w_mwm * (1.0 - 1e-12));
    CHECK(w_wf >= w_sd * (1.0 - 1e-12));
    CHECK(w_wf >= w_sp * (1.0 - 1e-12));
    CHECK(lin_op.weight >= w_wf * (1.0 - 1e-12));
    CHECK(lin_op.weight == doctest::Approx(exact_mbp(ctx, PowerPolicy::OverPower).weight).epsilon(1e-9));
    CHECK(lin_sp.weight == doctest::Approx(w_sp).epsilon(1e-9));
    CHECK(audit(lin_op, in.topo, true).empty());
    CHECK(audit(lin_sp, in.topo, false).empty());
  }
}

TEST_CASE("linear programs") {
  LinearProgram lp;
  lp.a.resize(3, 2);
  lp.a << 1, 0, 0, 2, 3, 2;
  lp.b.resize(3);
  lp.b << 4, 12, 18;
  lp.c.resize(2);
  lp.c << 3, 5;
  const LpSolution s = solve_lp(lp);
  CHECK(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(36.0));
  CHECK(s.x(0) == doctest::Approx(2.0));
  CHECK(s.x(1) == doctest::Approx(6.0));

  LinearProgram unbounded;
  unbounded.a.resize(1, 2);
  unbounded.a << 1, -1;
  unbounded.b.resize(1);
  unbounded.b << 1;
  unbounded.c.resize(2);
  unbounded.c << 0, 1;
  CHECK(solve_lp(unbounded).status == LpStatus::Unbounded);

  // Degenerate vertex: many redundant constraints through the optimum.
  LinearProgram degenerate;
  degenerate.a.resize(4, 2);
  degenerate.a << 1, 1, 1, 1, 2, 2, 1, 0;
  degenerate.b.resize(4);
  degenerate.b << 1, 1, 2, 1;
  degenerate.c.resize(2);
  degenerate.c << 1, 1;
  CHECK(solve_lp(degenerate).objective == doctest::Approx(1.0));
}

TEST_CASE("MILP") {
  SUBCASE("transmitting forbids receiving") {
    MilpInstance inst;
    inst.num_nodes = 3;
    inst.degree = {1, 2, 1};
    inst.links = {{0, 1, 1.0}, {1, 2, 1.0}};
    CHECK(linearized_feasible(inst, {1, 0}));
    CHECK(linearized_feasible(inst, {0, 1}));
    CHECK_FALSE(linearized_feasible(inst, {1, 1}));
    const MilpResult r = solve_milp(inst);
    CHECK(r.optimal);
    CHECK(r.objective == doctest::Approx(1.0));
    CHECK(role_objective(inst, bit(1)) == 1.0);
  }
  SUBCASE("branch and bound against enumeration") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
      MilpInstance inst;
      inst.num_nodes = 3 + static_cast<int>(rng() % 6);
      inst.degree.assign(static_cast<std::size_t>(inst.num_nodes), 0);
      for (int a = 0; a < inst.num_nodes; ++a)
        for (int b = a + 1; b < inst.num_nodes; ++b) {
          if (unit(rng) >= 0.5) continue;
          ++inst.degree[static_cast<std::size_t>(a)];
          ++inst.degree[static_cast<std::size_t>(b)];
          const bool forward = unit(rng) < 0.5;
          inst.links.push_back({forward ? a : b, forward ? b : a, 0.1 + unit(rng)});
        }
      if (inst.links.empty()) continue;
      double best = 0.0;
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << inst.links.size()); ++m) {
        std::vector<char> sel(inst.links.size());
        double w = 0.0;
        for (std::size_t l = 0; l < sel.size(); ++l) {
          sel[l] = static_cast<char>((m >> l) & 1U);
          w += sel[l] ? inst.links[l].weight : 0.0;
        }
        if (linearized_feasible(inst, sel)) best = std::max(best, w);
      }
      MilpOptions opts;
      opts.incumbent_roles = rng() & full_mask(inst.num_nodes);
      const MilpResult r = solve_milp(inst, opts);
      CHECK(r.optimal);
      CHECK(r.objective == doctest::Approx(best).epsilon(1e-9));
      CHECK(r.bound == doctest::Approx(r.objective).epsilon(1e-9));
    }
  }
}

TEST_CASE("pick and compare") {
  QueueMatrix q;
  const Topology t = weighted_graph(4, {{0, 1, 4.0}, {2, 3, 1.0}, {1, 2, 2.0}}, q);
  const WeightContext ctx(t, q);
  RandomStream rng(5);
  // Previous roles are optimal here: nothing random can strictly beat them.
  const RoleMask best = exact_mbp(ctx, PowerPolicy::Waterfilling).roles;
  for (int i = 0; i < 200; ++i) CHECK(pick_and_compare(best, ctx, rng, PowerPolicy::Waterfilling).roles == best);
  // The result never falls below the refreshed previous weight, and a change
  // of roles needs a strict improvement.
  std::mt19937_64 pick(6);
  for (int i = 0; i < 200; ++i) {
    const RoleMask prev = pick() & full_mask(4);
    const double before = ctx.weight(prev, PowerPolicy::Waterfilling);
    const Schedule s = pick_and_compare(prev, ctx, rng, PowerPolicy::Waterfilling);
    CHECK(s.weight >= before);
    if (s.roles != prev) CHECK(s.weight > before);
  }
}

TEST_CASE("scheduler kinds") {
  for (SchedulerKind k : all_scheduler_kinds()) CHECK(parse_scheduler_kind(to_string(k)) == k);
  CHECK(parse_scheduler_kind("exact_mbp") == SchedulerKind::ExactMBP);
  CHECK(parse_scheduler_kind("MfWlInOp") == SchedulerKind::MFWLINOP);
  CHECK_THROWS(parse_scheduler_kind("nosuch"));
  CHECK(default_policy(SchedulerKind::MFWLINOP) == PowerPolicy::OverPower);
  CHECK(default_policy(SchedulerKind::MFWMPSP) == PowerPolicy::SplitPower);
  CHECK(default_policy(SchedulerKind::SFWBF) == PowerPolicy::SingleDest);
  CHECK(default_policy(SchedulerKind::MFWPAC) == PowerPolicy::Waterfilling);
  SchedulerConfig cfg;
  cfg.mp_policy = PowerPolicy::SplitPower;
  CHECK(Scheduler(SchedulerKind::MFWMP, cfg).policy() == PowerPolicy::SplitPower);
  CHECK(Scheduler(SchedulerKind::SFWBF, cfg).policy() == PowerPolicy::SingleDest);
}
