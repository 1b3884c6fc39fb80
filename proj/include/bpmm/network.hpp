#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpmm/channel.hpp"

namespace bpmm {

/// Hard cap on network size: role vectors are packed into 64-bit masks.
inline constexpr int kMaxNodes = 64;

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::UE;
  double x = 0.0, y = 0.0;  // meters
  double tx_power_dbm = 0.0;
  double noise_figure_db = 0.0;
  ArrayGeometry array{1};
};

Node make_node(int id, NodeKind kind, double x, double y, const RadioParams& params);

struct Flow {
  int id = 0;
  std::vector<int> sources;
  std::vector<int> destinations;

  bool is_source(int n) const;
  bool is_destination(int n) const;
};

/// Fading realization shared by both directions of a node pair. The stored
/// matrix is oriented low-id -> high-id (rows = receiver elements); the
/// opposite direction uses its transpose.
struct PairFading {
  CMatrix h;
  Beamformer bf;
};

struct DirectedLink {
  int id = 0;
  int tx = 0, rx = 0;
  LinkChannel chan;
  int pair = -1;  // index into Topology::pairs(), -1 if no fading stored
  bool reversed = false;
  bool explicit_snr = false;  // built by connect_with_snr
};

/// Parameters that regenerate a random drop bit-for-bit.
struct DropRecipe {
  std::uint64_t seed = 0;
  int n_ue = 0;
  double radius = 0.0;
};

/// Nodes, links, flows and channel realizations of one drop. Built
/// incrementally by the generator (or by tests), read-only afterwards.
class Topology {
 public:
  Topology() = default;
  Topology(RadioParams params, std::vector<Node> nodes);

  void add_flow(std::vector<int> sources, std::vector<int> destinations);

  /// Connects a reciprocal pair with a measured channel. Capacities follow
  /// from node powers and noise figures.
  void connect(int a, int b, LinkState state, double pathloss_db, double bf_gain,
               std::optional<PairFading> fading = std::nullopt);

  /// Connects a pair with explicit full-power unit SNRs (before alpha2) per
  /// direction. Used for synthetic networks.
  void connect_with_snr(int a, int b, double snr_ab, double snr_ba);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_flows() const { return static_cast<int>(flows_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }

  const RadioParams& params() const { return params_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int n) const { return nodes_.at(static_cast<std::size_t>(n)); }
  const std::vector<Flow>& flows() const { return flows_; }
  const std::vector<DirectedLink>& links() const { return links_; }
  const DirectedLink& link(int id) const { return links_[static_cast<std::size_t>(id)]; }
  const std::vector<PairFading>& pairs() const { return pairs_; }

  /// Sorted neighbor ids (Omega(n)).
  const std::vector<int>& neighbors(int n) const { return neighbors_[static_cast<std::size_t>(n)]; }
  /// Directed link ids leaving n, same order as neighbors(n).
  const std::vector<int>& out_links(int n) const { return out_links_[static_cast<std::size_t>(n)]; }
  const std::vector<int>& in_links(int n) const { return in_links_[static_cast<std::size_t>(n)]; }
  int degree(int n) const { return static_cast<int>(neighbors(n).size()); }
  int omega_max() const;

  /// Directed link id for (tx, rx), or -1.
  int link_id(int tx, int rx) const;

  bool has_fading() const { return !pairs_.empty(); }
  /// Fading matrix and beamformer of a directed link, oriented tx -> rx.
  CMatrix link_fading(int link_id) const;
  Beamformer link_beamformer(int link_id) const;

  /// Largest full-power capacity over all links (C_max).
  double max_capacity() const;

  const std::optional<DropRecipe>& recipe() const { return recipe_; }
  void set_recipe(DropRecipe r) { recipe_ = r; }

 private:
  void check_pair(int a, int b) const;
  int add_directed(int tx, int rx, LinkChannel chan, int pair, bool reversed);
  void refresh_split_capacity(int n);

  RadioParams params_;
  std::vector<Node> nodes_;
  std::vector<Flow> flows_;
  std::vector<DirectedLink> links_;
  std::vector<PairFading> pairs_;
  std::vector<std::vector<int>> neighbors_, out_links_, in_links_;
  std::vector<int> link_index_;
  std::optional<DropRecipe> recipe_;
};

/// UE-UE and BS-BS pairs never form links.
bool pair_allowed(NodeKind a, NodeKind b);

inline constexpr double kConnectivityThresholdDb = 200.0;
inline constexpr double kRelayDistance = 115.0;
inline constexpr int kRelayCount = 4;

/// BS at the origin, four relays at 115 m on the axes, n_ue users uniform on
/// a disk, one uplink and one downlink flow per user (flow 2k is UE k's
/// uplink, 2k+1 its downlink).
Topology generate_drop(std::uint64_t seed, int n_ue, double radius, const RadioParams& params = {},
                       const FadingParams& fading = {});

struct Diagnostics {
  int omega_max = 0;
  std::vector<int> isolated_nodes;
  std::vector<int> infeasible_flows;  // some source cannot reach any destination
  std::vector<std::string> messages;

  bool clean() const { return isolated_nodes.empty() && infeasible_flows.empty(); }
};

Diagnostics validate(const Topology& topo);

}  // namespace bpmm
