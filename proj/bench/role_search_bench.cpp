// Role-search kernels on generated drops. The queue state comes from a short
// MWM warm-up run so the weights look like mid-simulation traffic.
#include <benchmark/benchmark.h>

#include <map>

#include "bpmm/role_search.hpp"
#include "bpmm/sim.hpp"

namespace {

using namespace bpmm;

struct Fixture {
  Topology topo;
  QueueMatrix q;
};

const Fixture& fixture(int n_ue) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(n_ue);
  if (it != cache.end()) return it->second;
  Fixture fx{generate_drop(7, n_ue, 200.0), {}};
  SimConfig cfg;
  cfg.frames = 500;
  cfg.scheduler = SchedulerKind::MWM;
  run(fx.topo, cfg, [&](const FrameRecord& rec) {
    if (rec.frame == cfg.frames) fx.q = *rec.queues;
  });
  return cache.emplace(n_ue, std::move(fx)).first->second;
}

void search(benchmark::State& state, SearchKernel kernel, PowerPolicy policy) {
  const Fixture& fx = fixture(static_cast<int>(state.range(0)));
  const WeightContext ctx(fx.topo, fx.q);
  std::uint64_t visited = 0;
  for (auto _ : state) {
    const RoleSearchResult r = search_roles(ctx, policy, kernel);
    benchmark::DoNotOptimize(r.weight);
    visited += r.visited;
  }
  state.counters["nodes"] = fx.topo.num_nodes();
  state.counters["visited"] = benchmark::Counter(static_cast<double>(visited), benchmark::Counter::kAvgIterations);
}

// N = n_ue + 5.
void sizes(benchmark::internal::Benchmark* b) {
  for (int n_ue : {3, 7, 11}) b->Arg(n_ue);
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK_CAPTURE(search, serial_wf, SearchKernel::Serial, PowerPolicy::Waterfilling)->Apply(sizes);
BENCHMARK_CAPTURE(search, parallel_wf, SearchKernel::Parallel, PowerPolicy::Waterfilling)->Apply(sizes);
BENCHMARK_CAPTURE(search, pruned_wf, SearchKernel::Pruned, PowerPolicy::Waterfilling)->Apply(sizes);
BENCHMARK_CAPTURE(search, serial_sd, SearchKernel::Serial, PowerPolicy::SingleDest)->Apply(sizes);
BENCHMARK_CAPTURE(search, parallel_sd, SearchKernel::Parallel, PowerPolicy::SingleDest)->Apply(sizes);
BENCHMARK_CAPTURE(search, pruned_sd, SearchKernel::Pruned, PowerPolicy::SingleDest)->Apply(sizes);

BENCHMARK_MAIN();
