#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bpmm/power.hpp"

namespace bpmm {

/// Binary link-activation problem: choose x_l in {0,1} maximizing
/// sum_l w_l x_l such that no node both transmits and receives:
///   x_l + (1/|Omega(n)|) sum_{k} x_{k,n} <= 1   for every link l = (n, m).
struct MilpLink {
  int tx = 0;
  int rx = 0;
  double weight = 0.0;  // > 0
  int link = -1;        // topology link id, if any
};

struct MilpInstance {
  int num_nodes = 0;
  std::vector<MilpLink> links;
  std::vector<int> degree;  // |Omega(n)|, used only by the linearized rows
};

struct MilpOptions {
  double integrality_tol = 1e-6;
  double relative_gap = 1e-12;
  std::uint64_t max_nodes = 10'000'000;
  /// Role vector of a known feasible solution (e.g. last frame's schedule).
  std::optional<RoleMask> incumbent_roles;
};

struct MilpResult {
  std::vector<char> selected;  // per instance link
  double objective = 0.0;
  double bound = 0.0;  // equals objective when solved to optimality
  std::uint64_t nodes = 0;
  std::uint64_t lp_pivots = 0;
  bool optimal = false;
};

/// Objective of the link set induced by a role vector: every positive link
/// from a transmitter to a non-transmitter.
double role_objective(const MilpInstance& inst, RoleMask roles);

/// Whether a binary selection satisfies the linearized half-duplex rows.
bool linearized_feasible(const MilpInstance& inst, const std::vector<char>& selected);

/// Best-bound branch and bound over LP relaxations.
MilpResult solve_milp(const MilpInstance& inst, const MilpOptions& opts = {});

/// Instance over the positive-pressure links of a frame, weighted by Q times
/// the full-power (OverPower) or split-power (SplitPower) capacity.
MilpInstance make_milp_instance(const WeightContext& ctx, PowerPolicy policy);

}  // namespace bpmm
