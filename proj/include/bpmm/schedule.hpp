#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bpmm/power.hpp"

namespace bpmm {

/// Node roles plus per-link power fractions (indexed by link id).
struct Schedule {
  RoleMask roles = 0;
  std::vector<double> power;
  double weight = 0.0;

  bool transmits(int n) const { return has_bit(roles, n); }
};

/// Schedule for fixed roles with power chosen by `policy` against the
/// current pressures.
Schedule make_schedule(const WeightContext& ctx, RoleMask roles, PowerPolicy policy);

/// Sets each link's fraction to 1 (OverPower) or 1/|Omega(tx)| (SplitPower)
/// on the chosen link set and derives roles from the transmitters used.
Schedule schedule_from_links(const WeightContext& ctx, const std::vector<int>& links, PowerPolicy policy);

/// Capacities that the schedule realizes this frame, per link id.
std::vector<double> schedule_capacities(const Schedule& sch, const Topology& topo);

/// Feasibility violations of a schedule; empty when feasible. `over_power`
/// lifts the per-transmitter power budget.
std::vector<std::string> audit(const Schedule& sch, const Topology& topo, bool over_power);

enum class SchedulerKind {
  MWM,
  SFWBF,
  SFWMP,
  ExactMBP,
  MFWMP,
  MFWMPSP,
  MFWMPOP,
  MFWLINOP,
  MFWLINSP,
  MFWPAC,
};

std::string_view to_string(SchedulerKind kind);
SchedulerKind parse_scheduler_kind(std::string_view text);
const std::vector<SchedulerKind>& all_scheduler_kinds();

/// Power policy a scheduler uses for the powers it actually transmits with.
PowerPolicy default_policy(SchedulerKind kind);
/// Whether the scheduler's output may exceed the per-transmitter budget.
bool uses_over_power(SchedulerKind kind);

}  // namespace bpmm
