#include "bpmm/schedule.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace bpmm {

namespace {
constexpr double kPowerTolerance = 1e-9;
}

Schedule make_schedule(const WeightContext& ctx, RoleMask roles, PowerPolicy policy) {
  Schedule sch;
  sch.roles = roles;
  sch.power.assign(static_cast<std::size_t>(ctx.topology().num_links()), 0.0);
  const RoleMask available = ~roles;
  for (RoleMask tx = roles & ctx.active_transmitters(); tx; tx &= tx - 1) {
    sch.weight += ctx.allocate(std::countr_zero(tx), available, policy, sch.power);
  }
  return sch;
}

Schedule schedule_from_links(const WeightContext& ctx, const std::vector<int>& links, PowerPolicy policy) {
  const Topology& topo = ctx.topology();
  Schedule sch;
  sch.power.assign(static_cast<std::size_t>(topo.num_links()), 0.0);
  for (int l : links) {
    const DirectedLink& link = topo.link(l);
    sch.roles |= bit(link.tx);
    const double q = ctx.backpressure().weight[static_cast<std::size_t>(l)];
    if (policy == PowerPolicy::OverPower) {
      sch.power[static_cast<std::size_t>(l)] = 1.0;
      sch.weight += q * link.chan.cap_full_power;
    } else if (policy == PowerPolicy::SplitPower) {
      sch.power[static_cast<std::size_t>(l)] = 1.0 / topo.degree(link.tx);
      sch.weight += q * link.chan.cap_split_power;
    } else {
      throw std::invalid_argument("link-set schedules use fixed power policies only");
    }
  }
  return sch;
}

std::vector<double> schedule_capacities(const Schedule& sch, const Topology& topo) {
  std::vector<double> caps(static_cast<std::size_t>(topo.num_links()), 0.0);
  for (const DirectedLink& l : topo.links()) {
    const double p = sch.power[static_cast<std::size_t>(l.id)];
    if (p <= 0.0) continue;
    // Fixed fractions reuse the cached capacities bit-for-bit.
    if (p == 1.0) {
      caps[static_cast<std::size_t>(l.id)] = l.chan.cap_full_power;
    } else if (p == 1.0 / topo.degree(l.tx)) {
      caps[static_cast<std::size_t>(l.id)] = l.chan.cap_split_power;
    } else {
      caps[static_cast<std::size_t>(l.id)] = link_rate(p, l.chan, topo.params());
    }
  }
  return caps;
}

std::vector<std::string> audit(const Schedule& sch, const Topology& topo, bool over_power) {
  std::vector<std::string> issues;
  if (sch.power.size() != static_cast<std::size_t>(topo.num_links())) {
    issues.push_back("power vector size does not match link count");
    return issues;
  }
  if (topo.num_nodes() < 64 && (sch.roles >> topo.num_nodes()) != 0) issues.push_back("role bits beyond node count");
  std::vector<double> budget(static_cast<std::size_t>(topo.num_nodes()), 0.0);
  for (const DirectedLink& l : topo.links()) {
    const double p = sch.power[static_cast<std::size_t>(l.id)];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kPowerTolerance) {
      issues.push_back("link " + std::to_string(l.tx) + "->" + std::to_string(l.rx) + " has power outside [0,1]");
      continue;
    }
    if (p <= 0.0) continue;
    if (!sch.transmits(l.tx) || sch.transmits(l.rx))
      issues.push_back("half-duplex violated on link " + std::to_string(l.tx) + "->" + std::to_string(l.rx));
    budget[static_cast<std::size_t>(l.tx)] += p;
  }
  if (!over_power) {
    for (int n = 0; n < topo.num_nodes(); ++n) {
      if (budget[static_cast<std::size_t>(n)] > 1.0 + kPowerTolerance)
        issues.push_back("node " + std::to_string(n) + " exceeds its power budget");
    }
  }
  return issues;
}

std::string_view to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::MWM: return "MWM";
    case SchedulerKind::SFWBF: return "SFWBF";
    case SchedulerKind::SFWMP: return "SFWMP";
    case SchedulerKind::ExactMBP: return "ExactMBP";
    case SchedulerKind::MFWMP: return "MFWMP";
    case SchedulerKind::MFWMPSP: return "MFWMPSP";
    case SchedulerKind::MFWMPOP: return "MFWMPOP";
    case SchedulerKind::MFWLINOP: return "MFWLINOP";
    case SchedulerKind::MFWLINSP: return "MFWLINSP";
    case SchedulerKind::MFWPAC: return "MFWPAC";
  }
  return "?";
}

const std::vector<SchedulerKind>& all_scheduler_kinds() {
  static const std::vector<SchedulerKind> kinds = {
      SchedulerKind::MWM,     SchedulerKind::SFWBF,   SchedulerKind::SFWMP,    SchedulerKind::ExactMBP,
      SchedulerKind::MFWMP,   SchedulerKind::MFWMPSP, SchedulerKind::MFWMPOP,  SchedulerKind::MFWLINOP,
      SchedulerKind::MFWLINSP, SchedulerKind::MFWPAC};
  return kinds;
}

SchedulerKind parse_scheduler_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (SchedulerKind k : all_scheduler_kinds()) {
    std::string name(to_string(k));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == name) return k;
  }
  if (lower == "exact_mbp" || lower == "exact-mbp" || lower == "mbp") return SchedulerKind::ExactMBP;
  throw std::invalid_argument("unknown scheduler: " + std::string(text));
}

PowerPolicy default_policy(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::MWM:
    case SchedulerKind::SFWBF:
    case SchedulerKind::SFWMP: return PowerPolicy::SingleDest;
    case SchedulerKind::MFWMPSP:
    case SchedulerKind::MFWLINSP: return PowerPolicy::SplitPower;
    case SchedulerKind::MFWMPOP:
    case SchedulerKind::MFWLINOP: return PowerPolicy::OverPower;
    case SchedulerKind::ExactMBP:
    case SchedulerKind::MFWMP:
    case SchedulerKind::MFWPAC: return PowerPolicy::Waterfilling;
  }
  return PowerPolicy::Waterfilling;
}

bool uses_over_power(SchedulerKind kind) { return default_policy(kind) == PowerPolicy::OverPower; }

}  // namespace bpmm
