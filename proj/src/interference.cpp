#include "bpmm/interference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bpmm {

namespace {

double coupling(const CVector& w_rx, const CMatrix& h, const CVector& w_tx) {
  return std::norm((w_rx.transpose() * h * w_tx)(0, 0));
}

}  // namespace

std::vector<LinkInterference> evaluate_interference(const Schedule& sch, const Topology& topo) {
  if (!topo.has_fading()) throw std::invalid_argument("interference evaluation needs fading matrices");
  const RadioParams& params = topo.params();
  std::vector<int> active;
  for (const DirectedLink& l : topo.links())
    if (sch.power[static_cast<std::size_t>(l.id)] > 0.0) active.push_back(l.id);

  auto tx_watts = [&](int link) {
    const DirectedLink& l = topo.link(link);
    return sch.power[static_cast<std::size_t>(link)] * dbm_to_watts(topo.node(l.tx).tx_power_dbm);
  };
  auto pathgain = [&](int link) { return std::pow(10.0, -topo.link(link).chan.pathloss_db / 10.0); };

  std::vector<Beamformer> bf(static_cast<std::size_t>(topo.num_links()));
  for (int id : active) bf[static_cast<std::size_t>(id)] = topo.link_beamformer(id);

  std::vector<LinkInterference> out;
  out.reserve(active.size());
  for (int id : active) {
    const DirectedLink& l = topo.link(id);
    LinkInterference r;
    r.link = id;
    r.noise = noise_power_watts(topo.node(l.rx).noise_figure_db, params);
    r.signal = tx_watts(id) * pathgain(id) * l.chan.bf_gain;
    const CVector& w_rx = bf[static_cast<std::size_t>(id)].w_rx;
    for (int other : active) {
      if (other == id) continue;
      const DirectedLink& o = topo.link(other);
      // Channel from the interfering transmitter to this receiver.
      const int path = topo.link_id(o.tx, l.rx);
      if (path < 0) continue;
      const double p = tx_watts(other) * pathgain(path) *
                       coupling(w_rx, topo.link_fading(path), bf[static_cast<std::size_t>(other)].w_tx);
      if (o.tx == l.tx) {
        r.auto_interference += p;
      } else if (o.rx == l.rx) {
        r.same_port += p;
      } else {
        r.cross += p;
      }
    }
    r.rate_if = link_rate(sch.power[static_cast<std::size_t>(id)], l.chan, params);
    r.rate_sinr = l.chan.state == LinkState::Out
                      ? 0.0
                      : params.rate_scale() * std::log2(1.0 + params.alpha2 * r.signal / (r.noise + r.interference()));
    out.push_back(r);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace bpmm
