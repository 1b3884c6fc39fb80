#pragma once

#include <string_view>
#include <vector>

#include "bpmm/schedule.hpp"

namespace bpmm {

/// Node factors (one per transmitter, scope = node plus its receivers) or,
/// for additive policies only, unary plus pairwise factors.
enum class Factorization { Node, Pairwise };

/// Structured kernels minimize node factors in closed form (SingleDest,
/// SplitPower, OverPower) or over a per-frame table of subset weights
/// (Waterfilling). Generic re-evaluates the factor for every local
/// assignment and serves as the reference.
enum class MpKernel { Structured, Generic };

enum class MpTermination { Converged, Stable, Oscillation, IterationCap };

std::string_view to_string(Factorization f);
Factorization parse_factorization(std::string_view text);
std::string_view to_string(MpKernel k);
MpKernel parse_mp_kernel(std::string_view text);
std::string_view to_string(MpTermination t);

struct MpConfig {
  int max_iters = 100;
  double tol = 1e-9;  // max message change for convergence
  /// Stability and oscillation checks start after this many iterations so
  /// messages can cross the graph; negative means "number of nodes".
  int warmup = -1;
  Factorization factorization = Factorization::Node;
  MpKernel kernel = MpKernel::Structured;
  int local_cap_log2 = 20;  // max local assignments per node factor = 2^cap
};

struct MpResult {
  Schedule schedule;
  int iterations = 0;
  MpTermination termination = MpTermination::IterationCap;
  bool truncated_factor = false;  // some factor exceeded the local cap
};

/// Weight node n contributes as a transmitter given the roles of n and its
/// neighbors (bits outside the scope are ignored).
double factor_value(const WeightContext& ctx, int n, RoleMask assignment, PowerPolicy policy);

/// Synchronous min-sum over the role factor graph; returns the decoded roles
/// with power recomputed exactly under `policy`.
MpResult run_mp(const WeightContext& ctx, PowerPolicy policy, const MpConfig& cfg = {});

}  // namespace bpmm
