#include "bpmm/power.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bpmm {

RoleMask full_mask(int n) { return n >= 64 ? ~RoleMask{0} : (RoleMask{1} << n) - 1; }

std::string_view to_string(PowerPolicy policy) {
  switch (policy) {
    case PowerPolicy::Waterfilling: return "waterfilling";
    case PowerPolicy::SplitPower: return "split";
    case PowerPolicy::OverPower: return "over";
    case PowerPolicy::SingleDest: return "single";
  }
  return "?";
}

PowerPolicy parse_power_policy(std::string_view text) {
  if (text == "waterfilling" || text == "wf") return PowerPolicy::Waterfilling;
  if (text == "split" || text == "sp") return PowerPolicy::SplitPower;
  if (text == "over" || text == "op") return PowerPolicy::OverPower;
  if (text == "single" || text == "sd") return PowerPolicy::SingleDest;
  throw std::invalid_argument("unknown power policy: " + std::string(text));
}

namespace {

// Active set of weighted waterfilling is a prefix of the k/b-descending order:
// candidate j joins while its zero-power marginal k_j/b_j exceeds the level
// of the current prefix.
template <typename Get>
double waterfill_level(std::size_t count, Get get) {
  double sum_k = 0.0, sum_b = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const auto [k, b] = get(j);
    if (sum_k > 0.0 && !(k / b > sum_k / (1.0 + sum_b))) break;
    sum_k += k;
    sum_b += b;
  }
  return sum_k / (1.0 + sum_b);
}

}  // namespace

WaterfillResult waterfill(const std::vector<double>& k, const std::vector<double>& b) {
  if (k.size() != b.size()) throw std::invalid_argument("waterfill: size mismatch");
  WaterfillResult r;
  r.power.assign(k.size(), 0.0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(b[i] > 0.0)) throw std::invalid_argument("waterfill: b must be positive");
    if (k[i] > 0.0) order.push_back(i);
  }
  if (order.empty()) return r;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return k[x] / b[x] > k[y] / b[y]; });
  const double nu = waterfill_level(order.size(), [&](std::size_t j) {
    return std::pair{k[order[j]], b[order[j]]};
  });
  r.level = nu;
  for (std::size_t i : order) {
    const double p = k[i] / nu - b[i];
    if (p > 0.0) {
      r.power[i] = p;
      r.objective += k[i] * std::log1p(p / b[i]);
    }
  }
  return r;
}

NodeAllocation waterfill(int n, const std::vector<int>& receivers, const std::vector<double>& pressure,
                         const Topology& topo) {
  if (receivers.size() != pressure.size()) throw std::invalid_argument("waterfill: size mismatch");
  const RadioParams& params = topo.params();
  const double scale = params.rate_scale() / std::numbers::ln2;
  std::vector<double> k(receivers.size(), 0.0), b(receivers.size(), 1.0);
  for (std::size_t i = 0; i < receivers.size(); ++i) {
    const int l = topo.link_id(n, receivers[i]);
    if (l < 0) throw std::invalid_argument("waterfill: receiver is not a neighbor");
    const double snr = topo.link(l).chan.unit_snr;
    if (pressure[i] > 0.0 && snr > 0.0) {
      k[i] = pressure[i] * scale;
      b[i] = 1.0 / (params.alpha2 * snr);
    }
  }
  const WaterfillResult wf = waterfill(k, b);
  return NodeAllocation{wf.power, wf.objective};
}

WeightContext::WeightContext(const Topology& topo, const Backpressure& bp) : topo_(&topo), bp_(bp) { build(); }

WeightContext::WeightContext(const Topology& topo, const QueueMatrix& q)
    : topo_(&topo), bp_(compute_backpressure(q, topo)) {
  build();
}

void WeightContext::build() {
  const RadioParams& params = topo_->params();
  const double scale = params.rate_scale() / std::numbers::ln2;
  const int n_nodes = topo_->num_nodes();
  terms_.assign(static_cast<std::size_t>(n_nodes), {});
  rx_mask_.assign(static_cast<std::size_t>(n_nodes), 0);
  for (int n = 0; n < n_nodes; ++n) {
    auto& terms = terms_[static_cast<std::size_t>(n)];
    for (int l : topo_->out_links(n)) {
      const DirectedLink& link = topo_->link(l);
      const double q = bp_.weight[static_cast<std::size_t>(l)];
      if (!(q > 0.0) || !(link.chan.unit_snr > 0.0)) continue;
      LinkTerm t;
      t.link = l;
      t.rx = link.rx;
      t.pressure = q;
      t.w_full = q * link.chan.cap_full_power;
      t.w_split = q * link.chan.cap_split_power;
      t.k = q * scale;
      t.b = 1.0 / (params.alpha2 * link.chan.unit_snr);
      terms.push_back(t);
      rx_mask_[static_cast<std::size_t>(n)] |= bit(link.rx);
    }
    std::stable_sort(terms.begin(), terms.end(),
                     [](const LinkTerm& x, const LinkTerm& y) { return x.k / x.b > y.k / y.b; });
    if (!terms.empty()) active_tx_ |= bit(n);
  }
}

double WeightContext::transmitter_weight(int n, RoleMask available, PowerPolicy policy) const {
  const auto& terms = terms_[static_cast<std::size_t>(n)];
  if ((available & rx_mask_[static_cast<std::size_t>(n)]) == 0) return 0.0;
  double w = 0.0;
  switch (policy) {
    case PowerPolicy::SingleDest:
      for (const LinkTerm& t : terms)
        if (has_bit(available, t.rx)) w = std::max(w, t.w_full);
      return w;
    case PowerPolicy::SplitPower:
      for (const LinkTerm& t : terms)
        if (has_bit(available, t.rx)) w += t.w_split;
      return w;
    case PowerPolicy::OverPower:
      for (const LinkTerm& t : terms)
        if (has_bit(available, t.rx)) w += t.w_full;
      return w;
    case PowerPolicy::Waterfilling: {
      double sum_k = 0.0, sum_b = 0.0;
      std::size_t end = 0;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const LinkTerm& t = terms[j];
        if (!has_bit(available, t.rx)) continue;
        if (sum_k > 0.0 && !(t.k / t.b > sum_k / (1.0 + sum_b))) break;
        sum_k += t.k;
        sum_b += t.b;
        end = j + 1;
      }
      const double nu = sum_k / (1.0 + sum_b);
      for (std::size_t j = 0; j < end; ++j) {
        const LinkTerm& t = terms[j];
        if (has_bit(available, t.rx)) w += t.k * std::log(t.k / (nu * t.b));
      }
      return w;
    }
  }
  return w;
}

double WeightContext::allocate(int n, RoleMask available, PowerPolicy policy, std::vector<double>& power) const {
  const auto& terms = terms_[static_cast<std::size_t>(n)];
  const double split = 1.0 / static_cast<double>(std::max(1, topo_->degree(n)));
  double w = 0.0;
  switch (policy) {
    case PowerPolicy::SingleDest: {
      const LinkTerm* best = nullptr;
      for (const LinkTerm& t : terms) {
        if (!has_bit(available, t.rx)) continue;
        // Ties go to the lowest receiver id.
        if (!best || t.w_full > best->w_full || (t.w_full == best->w_full && t.rx < best->rx)) best = &t;
      }
      if (best) {
        power[static_cast<std::size_t>(best->link)] = 1.0;
        w = best->w_full;
      }
      return w;
    }
    case PowerPolicy::SplitPower:
    case PowerPolicy::OverPower:
      for (const LinkTerm& t : terms) {
        if (!has_bit(available, t.rx)) continue;
        const bool over = policy == PowerPolicy::OverPower;
        power[static_cast<std::size_t>(t.link)] = over ? 1.0 : split;
        w += over ? t.w_full : t.w_split;
      }
      return w;
    case PowerPolicy::Waterfilling: {
      double sum_k = 0.0, sum_b = 0.0;
      std::size_t end = 0;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const LinkTerm& t = terms[j];
        if (!has_bit(available, t.rx)) continue;
        if (sum_k > 0.0 && !(t.k / t.b > sum_k / (1.0 + sum_b))) break;
        sum_k += t.k;
        sum_b += t.b;
        end = j + 1;
      }
      if (sum_k <= 0.0) return 0.0;
      const double nu = sum_k / (1.0 + sum_b);
      for (std::size_t j = 0; j < end; ++j) {
        const LinkTerm& t = terms[j];
        if (!has_bit(available, t.rx)) continue;
        const double p = t.k / nu - t.b;
        if (p <= 0.0) continue;
        power[static_cast<std::size_t>(t.link)] = p;
        w += t.k * std::log(t.k / (nu * t.b));
      }
      return w;
    }
  }
  return w;
}

double WeightContext::weight(RoleMask roles, PowerPolicy policy) const {
  const RoleMask available = ~roles;
  double w = 0.0;
  for (RoleMask tx = roles & active_tx_; tx; tx &= tx - 1) {
    w += transmitter_weight(std::countr_zero(tx), available, policy);
  }
  return w;
}

}  // namespace bpmm
