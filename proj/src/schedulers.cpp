#include "bpmm/schedulers.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <unordered_map>

namespace bpmm {

namespace {

// Exact maximum-weight matching by memoized recursion on the lowest node that
// still has an edge: either it stays unmatched or it pairs with a neighbor.
class MatchingSolver {
 public:
  explicit MatchingSolver(int n) : n_(n), weight_(static_cast<std::size_t>(n * n), 0.0), adj_(static_cast<std::size_t>(n), 0) {}

  void add(int a, int b, double w) {
    weight_[idx(a, b)] = weight_[idx(b, a)] = w;
    adj_[static_cast<std::size_t>(a)] |= bit(b);
    adj_[static_cast<std::size_t>(b)] |= bit(a);
  }

  std::vector<std::pair<int, int>> solve() {
    RoleMask all = 0;
    for (int v = 0; v < n_; ++v)
      if (adj_[static_cast<std::size_t>(v)]) all |= bit(v);
    std::vector<std::pair<int, int>> pairs;
    RoleMask rem = all;
    while (true) {
      const int v = lowest_with_edge(rem);
      if (v < 0) break;
      const double skip = best(rem & ~bit(v));
      int partner = -1;
      double top = skip;
      for (RoleMask nb = adj_[static_cast<std::size_t>(v)] & rem; nb; nb &= nb - 1) {
        const int u = std::countr_zero(nb);
        const double w = weight_[idx(v, u)] + best(rem & ~bit(v) & ~bit(u));
        if (w > top) {
          top = w;
          partner = u;
        }
      }
      rem &= ~bit(v);
      if (partner >= 0) {
        pairs.emplace_back(v, partner);
        rem &= ~bit(partner);
      }
    }
    return pairs;
  }

 private:
  std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a * n_ + b); }

  int lowest_with_edge(RoleMask rem) const {
    for (RoleMask m = rem; m; m &= m - 1) {
      const int v = std::countr_zero(m);
      if (adj_[static_cast<std::size_t>(v)] & rem) return v;
    }
    return -1;
  }

  double best(RoleMask rem) {
    const int v = lowest_with_edge(rem);
    if (v < 0) return 0.0;
    rem &= ~(bit(v) - 1);  // nodes below v have no edges left in rem
    if (auto it = memo_.find(rem); it != memo_.end()) return it->second;
    double top = best(rem & ~bit(v));
    for (RoleMask nb = adj_[static_cast<std::size_t>(v)] & rem; nb; nb &= nb - 1) {
      const int u = std::countr_zero(nb);
      top = std::max(top, weight_[idx(v, u)] + best(rem & ~bit(v) & ~bit(u)));
    }
    memo_.emplace(rem, top);
    return top;
  }

  int n_;
  std::vector<double> weight_;
  std::vector<RoleMask> adj_;
  std::unordered_map<RoleMask, double> memo_;
};

RoleSearchResult checked_search(const WeightContext& ctx, PowerPolicy policy, int limit, SearchKernel kernel,
                                std::optional<RoleMask> hint) {
  if (ctx.num_nodes() > limit)
    throw ExhaustiveLimitError("exhaustive search refused: " + std::to_string(ctx.num_nodes()) +
                               " nodes exceed the limit of " + std::to_string(limit));
  return search_roles(ctx, policy, kernel, hint);
}

}  // namespace

Schedule mwm(const WeightContext& ctx) {
  const Topology& topo = ctx.topology();
  const int n = topo.num_nodes();
  // Directed full-power weights; the pair weight is the heavier direction.
  std::vector<double> directed(static_cast<std::size_t>(n * n), 0.0);
  for (int a = 0; a < n; ++a)
    for (const LinkTerm& t : ctx.terms(a)) directed[static_cast<std::size_t>(a * n + t.rx)] = t.w_full;
  MatchingSolver solver(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double w = std::max(directed[static_cast<std::size_t>(a * n + b)], directed[static_cast<std::size_t>(b * n + a)]);
      if (w > 0.0) solver.add(a, b, w);
    }
  }
  Schedule sch;
  sch.power.assign(static_cast<std::size_t>(topo.num_links()), 0.0);
  for (auto [a, b] : solver.solve()) {
    const double ab = directed[static_cast<std::size_t>(a * n + b)];
    const double ba = directed[static_cast<std::size_t>(b * n + a)];
    const int tx = ab >= ba ? a : b;  // a < b, so ties go to the lower id
    const int rx = tx == a ? b : a;
    sch.roles |= bit(tx);
    sch.power[static_cast<std::size_t>(topo.link_id(tx, rx))] = 1.0;
    sch.weight += std::max(ab, ba);
  }
  return sch;
}

Schedule sfw_bruteforce(const WeightContext& ctx, int exhaustive_max_n, SearchKernel kernel,
                        std::optional<RoleMask> hint) {
  const RoleSearchResult r = checked_search(ctx, PowerPolicy::SingleDest, exhaustive_max_n, kernel, hint);
  return make_schedule(ctx, r.roles, PowerPolicy::SingleDest);
}

Schedule exact_mbp(const WeightContext& ctx, PowerPolicy policy, int exhaustive_max_n, SearchKernel kernel,
                   std::optional<RoleMask> hint) {
  const RoleSearchResult r = checked_search(ctx, policy, exhaustive_max_n, kernel, hint);
  return make_schedule(ctx, r.roles, policy);
}

Schedule milp_schedule(const WeightContext& ctx, PowerPolicy policy, const MilpOptions& opts, MilpResult* stats) {
  const MilpInstance inst = make_milp_instance(ctx, policy);
  const MilpResult res = solve_milp(inst, opts);
  std::vector<int> links;
  for (std::size_t i = 0; i < inst.links.size(); ++i)
    if (res.selected[i]) links.push_back(inst.links[i].link);
  if (stats) *stats = res;
  return schedule_from_links(ctx, links, policy);
}

Schedule pick_and_compare(RoleMask previous, const WeightContext& ctx, RandomStream& rng, PowerPolicy policy) {
  const int n = ctx.num_nodes();
  RoleMask candidate = 0;
  std::bernoulli_distribution coin(0.5);
  for (int v = 0; v < n; ++v)
    if (coin(rng)) candidate |= bit(v);
  const double w_prev = ctx.weight(previous, policy);
  const double w_new = ctx.weight(candidate, policy);
  return make_schedule(ctx, w_new > w_prev ? candidate : previous, policy);
}

Scheduler::Scheduler(SchedulerKind kind, SchedulerConfig cfg)
    : kind_(kind), cfg_(std::move(cfg)), rng_(make_stream(cfg_.seed, 0x9ac)) {}

PowerPolicy Scheduler::policy() const {
  switch (kind_) {
    case SchedulerKind::SFWMP:
    case SchedulerKind::MFWMP:
    case SchedulerKind::MFWMPSP:
    case SchedulerKind::MFWMPOP: return cfg_.mp_policy.value_or(default_policy(kind_));
    default: return default_policy(kind_);
  }
}

Schedule Scheduler::next(const WeightContext& ctx) {
  ++stats_.calls;
  Schedule sch;
  switch (kind_) {
    case SchedulerKind::MWM: sch = mwm(ctx); break;
    case SchedulerKind::SFWBF:
    case SchedulerKind::ExactMBP: {
      const RoleSearchResult r = checked_search(ctx, policy(), cfg_.exhaustive_max_n, cfg_.kernel, previous_);
      stats_.search_nodes += r.visited;
      sch = make_schedule(ctx, r.roles, policy());
      break;
    }
    case SchedulerKind::MFWLINOP:
    case SchedulerKind::MFWLINSP: {
      MilpOptions opts;
      opts.incumbent_roles = previous_;
      MilpResult res;
      sch = milp_schedule(ctx, policy(), opts, &res);
      stats_.milp_nodes += res.nodes;
      break;
    }
    case SchedulerKind::MFWPAC: sch = pick_and_compare(previous_.value_or(0), ctx, rng_, policy()); break;
    case SchedulerKind::SFWMP:
    case SchedulerKind::MFWMP:
    case SchedulerKind::MFWMPSP:
    case SchedulerKind::MFWMPOP: {
      const MpResult r = run_mp(ctx, policy(), cfg_.mp);
      stats_.mp_iterations += static_cast<std::uint64_t>(r.iterations);
      switch (r.termination) {
        case MpTermination::Converged: ++stats_.mp_converged; break;
        case MpTermination::Stable: ++stats_.mp_stable; break;
        case MpTermination::Oscillation: ++stats_.mp_oscillation; break;
        case MpTermination::IterationCap: ++stats_.mp_iteration_cap; break;
      }
      sch = r.schedule;
      break;
    }
  }
  previous_ = sch.roles;
  return sch;
}

}  // namespace bpmm
