#pragma once

#include <Eigen/Dense>

#include <string_view>
#include <vector>

#include "bpmm/network.hpp"
#include "bpmm/random.hpp"

namespace bpmm {

/// Per-node per-flow backlog in bits, N x F. Destination entries are pinned to
/// zero at every frame boundary.
using QueueMatrix = Eigen::MatrixXd;
/// Arrival rates or realized arrivals, same shape as QueueMatrix.
using FlowMatrix = Eigen::MatrixXd;

QueueMatrix make_queues(const Topology& topo);

/// Congestion-control parameters for U(r) = 0.5 ln r.
struct CcParams {
  double v = 0.0;
  double c_max = 0.0;

  /// V = factor * C_max^2 with C_max taken from the topology.
  static CcParams for_topology(const Topology& topo, double v_factor = 10.0);
  void validate() const;
};

/// Source arrival rates lambda = min(V / (2 q), C_max); zero away from sources.
FlowMatrix congestion_control(const QueueMatrix& q, const Topology& topo, const CcParams& cc);

enum class ArrivalMode { Fluid, Poisson };

std::string_view to_string(ArrivalMode mode);
ArrivalMode parse_arrival_mode(std::string_view text);

/// Realized arrivals for one frame. Entries at a flow's own destinations and
/// at non-source nodes are zero.
FlowMatrix sample_arrivals(const FlowMatrix& lambda, const Topology& topo, ArrivalMode mode, RandomStream& rng);

/// Back pressure of every directed link: Q_l = max_f (q_tx^f - q_rx^f) and the
/// maximizing flow (lowest index on ties).
struct Backpressure {
  std::vector<double> weight;
  std::vector<int> flow;
};

Backpressure compute_backpressure(const QueueMatrix& q, const Topology& topo);

struct FlowRate {
  int link = 0;
  int flow = 0;
  double bits = 0.0;
};

struct RateAssignment {
  std::vector<FlowRate> entries;
};

/// Gives each link with Q > 0 to its max-pressure flow. Links of one
/// transmitter that share that flow split its backlog in proportion to
/// capacity, so no queue is over-drained.
RateAssignment assign_flow_rates(const QueueMatrix& q, const Topology& topo, const Backpressure& bp,
                                 const std::vector<double>& link_caps);

/// Applies transfers and arrivals in place and returns the bits absorbed at
/// destinations, per flow.
std::vector<double> update_queues(QueueMatrix& q, const Topology& topo, const RateAssignment& ra,
                                  const FlowMatrix& arrivals);

}  // namespace bpmm
