#include "bpmm/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace bpmm {

Node make_node(int id, NodeKind kind, double x, double y, const RadioParams& params) {
  return Node{id, kind, x, y, params.tx_power_dbm(kind), params.noise_figure_db(kind),
              ArrayGeometry(params.array_elements(kind))};
}

bool Flow::is_source(int n) const { return std::find(sources.begin(), sources.end(), n) != sources.end(); }

bool Flow::is_destination(int n) const {
  return std::find(destinations.begin(), destinations.end(), n) != destinations.end();
}

Topology::Topology(RadioParams params, std::vector<Node> nodes)
    : params_(params), nodes_(std::move(nodes)) {
  params_.validate();
  const auto n = nodes_.size();
  if (n > static_cast<std::size_t>(kMaxNodes)) throw std::invalid_argument("topology exceeds 64 nodes");
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].id != static_cast<int>(i)) throw std::invalid_argument("node ids must be 0..N-1 in order");
  }
  neighbors_.assign(n, {});
  out_links_.assign(n, {});
  in_links_.assign(n, {});
  link_index_.assign(n * n, -1);
}

void Topology::add_flow(std::vector<int> sources, std::vector<int> destinations) {
  if (sources.empty() || destinations.empty()) throw std::invalid_argument("flow needs sources and destinations");
  for (int s : sources) {
    if (s < 0 || s >= num_nodes()) throw std::out_of_range("flow source out of range");
    if (std::find(destinations.begin(), destinations.end(), s) != destinations.end())
      throw std::invalid_argument("flow sources and destinations must be disjoint");
  }
  for (int d : destinations) {
    if (d < 0 || d >= num_nodes()) throw std::out_of_range("flow destination out of range");
  }
  flows_.push_back(Flow{num_flows(), std::move(sources), std::move(destinations)});
}

void Topology::check_pair(int a, int b) const {
  if (a < 0 || b < 0 || a >= num_nodes() || b >= num_nodes() || a == b)
    throw std::invalid_argument("invalid node pair");
  if (link_id(a, b) >= 0) throw std::invalid_argument("pair already connected");
}

int Topology::add_directed(int tx, int rx, LinkChannel chan, int pair, bool reversed) {
  const int id = num_links();
  links_.push_back(DirectedLink{id, tx, rx, chan, pair, reversed, false});
  link_index_[static_cast<std::size_t>(tx * num_nodes() + rx)] = id;

  // Keep neighbor and out-link lists sorted by neighbor id.
  auto& nb = neighbors_[static_cast<std::size_t>(tx)];
  auto& out = out_links_[static_cast<std::size_t>(tx)];
  const auto pos = std::lower_bound(nb.begin(), nb.end(), rx) - nb.begin();
  nb.insert(nb.begin() + pos, rx);
  out.insert(out.begin() + pos, id);

  auto& in = in_links_[static_cast<std::size_t>(rx)];
  in.insert(std::upper_bound(in.begin(), in.end(), id,
                             [this](int l, int r) { return links_[static_cast<std::size_t>(l)].tx < links_[static_cast<std::size_t>(r)].tx; }),
            id);
  return id;
}

void Topology::refresh_split_capacity(int n) {
  const double share = 1.0 / static_cast<double>(std::max(1, degree(n)));
  for (int l : out_links(n)) {
    auto& chan = links_[static_cast<std::size_t>(l)].chan;
    chan.cap_split_power = link_rate(share, chan, params_);
  }
}

void Topology::connect(int a, int b, LinkState state, double pl_db, double bf_gain,
                       std::optional<PairFading> fading) {
  check_pair(a, b);
  if (state == LinkState::Out) throw std::invalid_argument("outage pairs are not links");
  int pair = -1;
  if (fading) {
    if (a > b) {
      // Store oriented low -> high.
      fading->h.transposeInPlace();
      fading->bf = reverse(fading->bf);
    }
    pair = static_cast<int>(pairs_.size());
    pairs_.push_back(std::move(*fading));
  }
  auto make_chan = [&](int tx, int rx) {
    LinkChannel c;
    c.state = state;
    c.pathloss_db = pl_db;
    c.bf_gain = bf_gain;
    c.unit_snr = unit_snr(pl_db, bf_gain, node(tx).tx_power_dbm, node(rx).noise_figure_db, params_);
    c.cap_full_power = link_rate(1.0, c, params_);
    return c;
  };
  add_directed(a, b, make_chan(a, b), pair, a > b);
  add_directed(b, a, make_chan(b, a), pair, b > a);
  refresh_split_capacity(a);
  refresh_split_capacity(b);
}

void Topology::connect_with_snr(int a, int b, double snr_ab, double snr_ba) {
  check_pair(a, b);
  auto make_chan = [&](double snr) {
    LinkChannel c;
    c.state = LinkState::Los;
    c.pathloss_db = 0.0;
    c.bf_gain = 1.0;
    c.unit_snr = snr;
    c.cap_full_power = link_rate(1.0, c, params_);
    return c;
  };
  links_[static_cast<std::size_t>(add_directed(a, b, make_chan(snr_ab), -1, false))].explicit_snr = true;
  links_[static_cast<std::size_t>(add_directed(b, a, make_chan(snr_ba), -1, false))].explicit_snr = true;
  refresh_split_capacity(a);
  refresh_split_capacity(b);
}

int Topology::omega_max() const {
  int m = 0;
  for (int n = 0; n < num_nodes(); ++n) m = std::max(m, degree(n));
  return m;
}

int Topology::link_id(int tx, int rx) const {
  if (tx < 0 || rx < 0 || tx >= num_nodes() || rx >= num_nodes()) return -1;
  return link_index_[static_cast<std::size_t>(tx * num_nodes() + rx)];
}

CMatrix Topology::link_fading(int id) const {
  const auto& l = link(id);
  if (l.pair < 0) throw std::logic_error("link has no stored fading");
  const auto& h = pairs_[static_cast<std::size_t>(l.pair)].h;
  return l.reversed ? CMatrix(h.transpose()) : h;
}

Beamformer Topology::link_beamformer(int id) const {
  const auto& l = link(id);
  if (l.pair < 0) throw std::logic_error("link has no stored fading");
  const auto& bf = pairs_[static_cast<std::size_t>(l.pair)].bf;
  return l.reversed ? reverse(bf) : bf;
}

double Topology::max_capacity() const {
  double c = 0.0;
  for (const auto& l : links_) c = std::max(c, l.chan.cap_full_power);
  return c;
}

bool pair_allowed(NodeKind a, NodeKind b) {
  if (a == NodeKind::UE && b == NodeKind::UE) return false;
  if (a == NodeKind::BS && b == NodeKind::BS) return false;
  return true;
}

Topology generate_drop(std::uint64_t seed, int n_ue, double radius, const RadioParams& params,
                       const FadingParams& fading) {
  if (n_ue < 1) throw std::invalid_argument("a drop needs at least one UE");
  if (!(radius > 0.0)) throw std::invalid_argument("drop radius must be positive");

  std::vector<Node> nodes;
  nodes.push_back(make_node(0, NodeKind::BS, 0.0, 0.0, params));
  for (int k = 0; k < kRelayCount; ++k) {
    const double angle = k * std::numbers::pi / 2.0;
    nodes.push_back(make_node(1 + k, NodeKind::RN, kRelayDistance * std::cos(angle),
                              kRelayDistance * std::sin(angle), params));
  }
  auto placement = make_stream(seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < n_ue; ++k) {
    const double r = radius * std::sqrt(unit(placement));
    const double phi = 2.0 * std::numbers::pi * unit(placement);
    nodes.push_back(make_node(1 + kRelayCount + k, NodeKind::UE, r * std::cos(phi), r * std::sin(phi), params));
  }

  Topology topo(params, nodes);
  const int n = topo.num_nodes();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const Node& na = nodes[static_cast<std::size_t>(a)];
      const Node& nb = nodes[static_cast<std::size_t>(b)];
      if (!pair_allowed(na.kind, nb.kind)) continue;
      auto rng = make_stream(seed, 1000 + static_cast<std::uint64_t>(a * n + b));
      // Coincident nodes are pushed apart to the 1 m reference distance.
      const double d = std::max(1.0, std::hypot(na.x - nb.x, na.y - nb.y));
      const LinkState state = sample_link_state(d, rng);
      if (state == LinkState::Out) continue;
      const double pl = sample_pathloss(d, state, rng);
      if (pl > kConnectivityThresholdDb) continue;
      PairFading pf;
      pf.h = sample_fading(na.array, nb.array, rng, fading);
      pf.bf = beamform(pf.h);
      const double gain = pf.bf.gain;
      topo.connect(a, b, state, pl, gain, std::move(pf));
    }
  }
  for (int k = 0; k < n_ue; ++k) {
    const int ue = 1 + kRelayCount + k;
    topo.add_flow({ue}, {0});
    topo.add_flow({0}, {ue});
  }
  topo.set_recipe(DropRecipe{seed, n_ue, radius});
  return topo;
}

Diagnostics validate(const Topology& topo) {
  Diagnostics diag;
  diag.omega_max = topo.omega_max();
  for (int n = 0; n < topo.num_nodes(); ++n) {
    if (topo.degree(n) == 0) {
      diag.isolated_nodes.push_back(n);
      diag.messages.push_back("isolated node " + std::to_string(n));
    }
  }
  for (const Flow& f : topo.flows()) {
    for (int src : f.sources) {
      std::vector<char> seen(static_cast<std::size_t>(topo.num_nodes()), 0);
      std::deque<int> frontier{src};
      seen[static_cast<std::size_t>(src)] = 1;
      bool reached = false;
      while (!frontier.empty() && !reached) {
        const int u = frontier.front();
        frontier.pop_front();
        for (int l : topo.out_links(u)) {
          const int v = topo.link(l).rx;
          if (seen[static_cast<std::size_t>(v)]) continue;
          seen[static_cast<std::size_t>(v)] = 1;
          if (f.is_destination(v)) reached = true;
          frontier.push_back(v);
        }
      }
      if (!reached) {
        diag.infeasible_flows.push_back(f.id);
        diag.messages.push_back("infeasible flow " + std::to_string(f.id) + " (source " + std::to_string(src) +
                                " cannot reach a destination)");
        break;
      }
    }
  }
  return diag;
}

}  // namespace bpmm
