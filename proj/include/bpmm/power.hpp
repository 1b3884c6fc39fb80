#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "bpmm/network.hpp"
#include "bpmm/traffic.hpp"

namespace bpmm {

/// Role vectors are bit masks: bit n set means node n transmits.
using RoleMask = std::uint64_t;

constexpr RoleMask bit(int n) { return RoleMask{1} << n; }
constexpr bool has_bit(RoleMask m, int n) { return (m >> n) & 1U; }
RoleMask full_mask(int n);

enum class PowerPolicy { Waterfilling, SplitPower, OverPower, SingleDest };

std::string_view to_string(PowerPolicy policy);
PowerPolicy parse_power_policy(std::string_view text);

/// Weighted waterfilling: maximize sum_m k_m ln(1 + p_m / b_m) subject to
/// sum p <= 1, p >= 0. Solved in closed form on the sorted active prefix.
struct WaterfillResult {
  std::vector<double> power;
  double level = 0.0;      // KKT multiplier nu; marginal k/(b+p) of active receivers
  double objective = 0.0;  // sum_m k_m ln(1 + p_m / b_m)
};

WaterfillResult waterfill(const std::vector<double>& k, const std::vector<double>& b);

/// Allocation for transmitter n over receivers with positive pressure, in
/// the units of the back-pressure objective: returns power fractions and
/// sum_m Q_m c_m(p_m). Receivers with Q <= 0 get zero power.
struct NodeAllocation {
  std::vector<double> power;  // per entry of `receivers`
  double weight = 0.0;
};

NodeAllocation waterfill(int n, const std::vector<int>& receivers, const std::vector<double>& pressure,
                         const Topology& topo);

/// One positive-pressure out-link of a transmitter.
struct LinkTerm {
  int link = 0;
  int rx = 0;
  double pressure = 0.0;
  double w_full = 0.0;   // Q * c(1)
  double w_split = 0.0;  // Q * c(1/|Omega(n)|)
  double k = 0.0;        // Q * rate_scale / ln 2
  double b = 0.0;        // 1 / (alpha2 * snr)
};

/// Per-frame snapshot of the back-pressure weights used by every role-based
/// scheduler. Evaluates the conditional weight of a role vector without
/// allocating.
class WeightContext {
 public:
  WeightContext(const Topology& topo, const Backpressure& bp);
  WeightContext(const Topology& topo, const QueueMatrix& q);

  const Topology& topology() const { return *topo_; }
  const Backpressure& backpressure() const { return bp_; }
  int num_nodes() const { return topo_->num_nodes(); }

  /// Positive-pressure out-links of n, sorted by k/b descending (waterfilling order).
  const std::vector<LinkTerm>& terms(int n) const { return terms_[static_cast<std::size_t>(n)]; }
  /// Receivers reachable from n over positive-pressure links.
  RoleMask receivers(int n) const { return rx_mask_[static_cast<std::size_t>(n)]; }
  /// Nodes with at least one positive-pressure out-link.
  RoleMask active_transmitters() const { return active_tx_; }

  /// Weight contributed by n transmitting to the receivers in `available`.
  /// Monotone non-decreasing in `available` for every policy.
  double transmitter_weight(int n, RoleMask available, PowerPolicy policy) const;

  /// Same as transmitter_weight and writes the chosen fractions into `power`
  /// (indexed by link id).
  double allocate(int n, RoleMask available, PowerPolicy policy, std::vector<double>& power) const;

  /// Sum over transmitters of transmitter_weight with available = ~roles.
  double weight(RoleMask roles, PowerPolicy policy) const;

 private:
  void build();

  const Topology* topo_;
  Backpressure bp_;
  std::vector<std::vector<LinkTerm>> terms_;
  std::vector<RoleMask> rx_mask_;
  RoleMask active_tx_ = 0;
};

}  // namespace bpmm
