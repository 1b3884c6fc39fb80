#pragma once

#include <random>
#include <utility>
#include <vector>

#include "bpmm/network.hpp"
#include "bpmm/traffic.hpp"

namespace bpmm::testing {

/// Nodes placed on a line; node 0 is a BS, the rest RNs (so every pair type
/// is allowed).
inline Topology bare_topology(int n, const RadioParams& params = {}) {
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i)
    nodes.push_back(make_node(i, i == 0 ? NodeKind::BS : NodeKind::RN, 10.0 * i, 0.0, params));
  return Topology(params, nodes);
}

/// Unit SNR (before alpha2) that gives exactly `bits` per frame at full power.
inline double snr_for_rate(double bits, const RadioParams& params = {}) {
  return (std::exp2(bits / params.rate_scale()) - 1.0) / params.alpha2;
}

/// Random connected graph on n nodes (random spanning tree plus extra edges)
/// with explicit SNRs.
inline Topology random_network(int n, double extra_edge_p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Topology topo = bare_topology(n);
  std::vector<std::vector<char>> linked(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  auto join = [&](int a, int b) {
    topo.connect_with_snr(a, b, std::pow(10.0, 4.0 * unit(rng) - 1.0), std::pow(10.0, 4.0 * unit(rng) - 1.0));
    linked[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    linked[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
  };
  for (int v = 1; v < n; ++v) join(static_cast<int>(rng() % static_cast<std::uint64_t>(v)), v);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!linked[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] && unit(rng) < extra_edge_p) join(a, b);
  return topo;
}

/// Random nonnegative queues with destinations pinned to zero.
inline QueueMatrix random_queues(const Topology& topo, std::mt19937_64& rng, double scale = 1e6) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  QueueMatrix q = make_queues(topo);
  for (const Flow& f : topo.flows())
    for (int n = 0; n < topo.num_nodes(); ++n)
      if (!f.is_destination(n) && unit(rng) < 0.7) q(n, f.id) = scale * unit(rng);
  return q;
}

/// Adds k random single-source single-destination flows.
inline void add_random_flows(Topology& topo, int k, std::mt19937_64& rng) {
  const auto n = static_cast<std::uint64_t>(topo.num_nodes());
  for (int i = 0; i < k; ++i) {
    const int s = static_cast<int>(rng() % n);
    int d = static_cast<int>(rng() % (n - 1));
    if (d >= s) ++d;
    topo.add_flow({s}, {d});
  }
}

}  // namespace bpmm::testing
