#include "bpmm/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace bpmm {

namespace {
// Floating-point slack when a transmitter drains its whole backlog.
constexpr double kDrainSlack = 1e-9;
}  // namespace

QueueMatrix make_queues(const Topology& topo) { return QueueMatrix::Zero(topo.num_nodes(), topo.num_flows()); }

CcParams CcParams::for_topology(const Topology& topo, double v_factor) {
  CcParams cc;
  cc.c_max = topo.max_capacity();
  cc.v = v_factor * cc.c_max * cc.c_max;
  return cc;
}

void CcParams::validate() const {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("V must be positive and finite");
  if (!(c_max >= 0.0) || !std::isfinite(c_max)) throw std::invalid_argument("C_max must be finite and >= 0");
}

FlowMatrix congestion_control(const QueueMatrix& q, const Topology& topo, const CcParams& cc) {
  FlowMatrix lambda = FlowMatrix::Zero(q.rows(), q.cols());
  for (const Flow& f : topo.flows()) {
    for (int s : f.sources) {
      const double backlog = q(s, f.id);
      lambda(s, f.id) = backlog > 0.0 ? std::min(cc.v / (2.0 * backlog), cc.c_max) : cc.c_max;
    }
  }
  return lambda;
}

std::string_view to_string(ArrivalMode mode) { return mode == ArrivalMode::Fluid ? "fluid" : "poisson"; }

ArrivalMode parse_arrival_mode(std::string_view text) {
  if (text == "fluid") return ArrivalMode::Fluid;
  if (text == "poisson") return ArrivalMode::Poisson;
  throw std::invalid_argument("unknown arrival mode: " + std::string(text));
}

FlowMatrix sample_arrivals(const FlowMatrix& lambda, const Topology& topo, ArrivalMode mode, RandomStream& rng) {
  FlowMatrix a = FlowMatrix::Zero(lambda.rows(), lambda.cols());
  for (const Flow& f : topo.flows()) {
    for (int s : f.sources) {
      const double rate = lambda(s, f.id);
      if (rate < 0.0) throw std::invalid_argument("arrival rate must be nonnegative");
      if (mode == ArrivalMode::Fluid) {
        a(s, f.id) = rate;
      } else if (rate > 0.0) {
        a(s, f.id) = static_cast<double>(std::poisson_distribution<long long>(rate)(rng));
      }
    }
  }
  return a;
}

Backpressure compute_backpressure(const QueueMatrix& q, const Topology& topo) {
  Backpressure bp;
  bp.weight.assign(static_cast<std::size_t>(topo.num_links()), 0.0);
  bp.flow.assign(static_cast<std::size_t>(topo.num_links()), -1);
  const auto flows = q.cols();
  for (const DirectedLink& l : topo.links()) {
    double best = -std::numeric_limits<double>::infinity();
    int arg = -1;
    for (Eigen::Index f = 0; f < flows; ++f) {
      const double diff = q(l.tx, f) - q(l.rx, f);
      if (diff > best) {
        best = diff;
        arg = static_cast<int>(f);
      }
    }
    if (arg >= 0) {
      bp.weight[static_cast<std::size_t>(l.id)] = best;
      bp.flow[static_cast<std::size_t>(l.id)] = arg;
    }
  }
  return bp;
}

RateAssignment assign_flow_rates(const QueueMatrix& q, const Topology& topo, const Backpressure& bp,
                                 const std::vector<double>& link_caps) {
  RateAssignment ra;
  for (int n = 0; n < topo.num_nodes(); ++n) {
    // Capacity per max-pressure flow over this transmitter's usable links.
    std::map<int, double> flow_cap;
    for (int l : topo.out_links(n)) {
      const auto li = static_cast<std::size_t>(l);
      if (link_caps[li] > 0.0 && bp.weight[li] > 0.0) flow_cap[bp.flow[li]] += link_caps[li];
    }
    for (int l : topo.out_links(n)) {
      const auto li = static_cast<std::size_t>(l);
      if (!(link_caps[li] > 0.0 && bp.weight[li] > 0.0)) continue;
      const int f = bp.flow[li];
      const double xi = link_caps[li] / flow_cap[f];
      const double bits = std::min(link_caps[li], q(n, f) * xi);
      if (bits > 0.0) ra.entries.push_back(FlowRate{l, f, bits});
    }
  }
  return ra;
}

std::vector<double> update_queues(QueueMatrix& q, const Topology& topo, const RateAssignment& ra,
                                  const FlowMatrix& arrivals) {
  std::vector<double> delivered(static_cast<std::size_t>(topo.num_flows()), 0.0);
  const QueueMatrix before = q;
  for (const FlowRate& r : ra.entries) {
    const DirectedLink& l = topo.link(r.link);
    q(l.tx, r.flow) -= r.bits;
    q(l.rx, r.flow) += r.bits;
  }
  q += arrivals;
  for (const Flow& f : topo.flows()) {
    for (int d : f.destinations) {
      delivered[static_cast<std::size_t>(f.id)] += q(d, f.id) - before(d, f.id) - arrivals(d, f.id);
      q(d, f.id) = 0.0;
    }
  }
  for (Eigen::Index n = 0; n < q.rows(); ++n) {
    for (Eigen::Index f = 0; f < q.cols(); ++f) {
      if (q(n, f) >= 0.0) continue;
      const double scale = std::max(before(n, f), 1.0);
      if (q(n, f) < -kDrainSlack * scale)
        throw std::logic_error("queue went negative at node " + std::to_string(n) + ", flow " + std::to_string(f));
      q(n, f) = 0.0;
    }
  }
  return delivered;
}

}  // namespace bpmm
