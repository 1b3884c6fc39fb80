#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "bpmm/milp.hpp"
#include "bpmm/mpengine.hpp"
#include "bpmm/role_search.hpp"
#include "bpmm/schedule.hpp"

namespace bpmm {

/// Thrown when an exhaustive scheduler is asked to search a network larger
/// than its configured limit.
class ExhaustiveLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Maximum-weight matching on the undirected pair graph; each matched pair
/// transmits at full power in its heavier direction (lower id on ties).
Schedule mwm(const WeightContext& ctx);

/// Exact argmax over role vectors with single-destination transmitters.
Schedule sfw_bruteforce(const WeightContext& ctx, int exhaustive_max_n = 20,
                        SearchKernel kernel = SearchKernel::Pruned, std::optional<RoleMask> hint = std::nullopt);

/// Exact argmax over role vectors of the conditional weight under `policy`.
Schedule exact_mbp(const WeightContext& ctx, PowerPolicy policy = PowerPolicy::Waterfilling, int exhaustive_max_n = 20,
                   SearchKernel kernel = SearchKernel::Pruned, std::optional<RoleMask> hint = std::nullopt);

/// Binary link activation under the linearized half-duplex rows, solved by
/// branch and bound. `policy` selects the link weights: OverPower (LINOP) or
/// SplitPower (LINSP).
Schedule milp_schedule(const WeightContext& ctx, PowerPolicy policy, const MilpOptions& opts = {},
                       MilpResult* stats = nullptr);

/// One Pick-and-Compare step: keeps the previous roles unless uniform random
/// roles score strictly higher under the current queues.
Schedule pick_and_compare(RoleMask previous, const WeightContext& ctx, RandomStream& rng,
                          PowerPolicy policy = PowerPolicy::Waterfilling);

struct SchedulerConfig {
  int exhaustive_max_n = 20;
  SearchKernel kernel = SearchKernel::Pruned;
  MpConfig mp;
  /// Overrides the power policy of the message-passing schedulers.
  std::optional<PowerPolicy> mp_policy;
  std::uint64_t seed = 0;  // PaC random stream
};

/// Per-run diagnostics a scheduler accumulates.
struct SchedulerStats {
  std::uint64_t calls = 0;
  std::uint64_t search_nodes = 0;
  std::uint64_t milp_nodes = 0;
  std::uint64_t mp_iterations = 0;
  std::uint64_t mp_converged = 0;
  std::uint64_t mp_stable = 0;
  std::uint64_t mp_oscillation = 0;
  std::uint64_t mp_iteration_cap = 0;
};

/// Stateful per-run scheduler: remembers the previous frame's roles (PaC
/// comparison, search warm start).
class Scheduler {
 public:
  Scheduler(SchedulerKind kind, SchedulerConfig cfg);

  SchedulerKind kind() const { return kind_; }
  /// Power policy of the schedules this scheduler emits.
  PowerPolicy policy() const;
  bool over_power() const { return policy() == PowerPolicy::OverPower; }

  Schedule next(const WeightContext& ctx);

  const SchedulerStats& stats() const { return stats_; }

 private:
  SchedulerKind kind_;
  SchedulerConfig cfg_;
  RandomStream rng_;
  std::optional<RoleMask> previous_;
  SchedulerStats stats_;
};

}  // namespace bpmm
