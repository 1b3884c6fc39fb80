#include "bpmm/mpengine.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bpmm {

std::string_view to_string(Factorization f) { return f == Factorization::Node ? "node" : "pairwise"; }

Factorization parse_factorization(std::string_view text) {
  if (text == "node") return Factorization::Node;
  if (text == "pairwise") return Factorization::Pairwise;
  throw std::invalid_argument("unknown factorization: " + std::string(text));
}

std::string_view to_string(MpKernel k) { return k == MpKernel::Structured ? "structured" : "generic"; }

MpKernel parse_mp_kernel(std::string_view text) {
  if (text == "structured") return MpKernel::Structured;
  if (text == "generic") return MpKernel::Generic;
  throw std::invalid_argument("unknown MP kernel: " + std::string(text));
}

std::string_view to_string(MpTermination t) {
  switch (t) {
    case MpTermination::Converged: return "converged";
    case MpTermination::Stable: return "stable";
    case MpTermination::Oscillation: return "oscillation";
    case MpTermination::IterationCap: return "iteration_cap";
  }
  return "?";
}

double factor_value(const WeightContext& ctx, int n, RoleMask assignment, PowerPolicy policy) {
  if (!has_bit(assignment, n)) return 0.0;
  return ctx.transmitter_weight(n, ~assignment, policy);
}

namespace {

using Msg = std::array<double, 2>;  // cost of s = 0, s = 1

void normalize(Msg& m) {
  const double lo = std::min(m[0], m[1]);
  m[0] -= lo;
  m[1] -= lo;
}

double change(const Msg& a, const Msg& b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

// Belief ties decode to 0. Messages are scaled to O(1), so the slack has an
// absolute floor; otherwise rounding noise near zero decides ties.
bool decode(const Msg& belief) {
  const double slack = 1e-12 * (1.0 + std::abs(belief[0]) + std::abs(belief[1]));
  return belief[1] < belief[0] - slack;
}

/// Factor graph with one factor per active transmitter. Edge k of factor f
/// connects it to scope[f][k]; scope[f][0] is the transmitter itself.
class NodeFactorGraph {
 public:
  NodeFactorGraph(const WeightContext& ctx, PowerPolicy policy, const MpConfig& cfg, double scale)
      : ctx_(ctx), policy_(policy), cfg_(cfg), scale_(scale) {
    const int n_nodes = ctx.num_nodes();
    var_edges_.assign(static_cast<std::size_t>(n_nodes), {});
    for (RoleMask m = ctx.active_transmitters(); m; m &= m - 1) {
      const int n = std::countr_zero(m);
      Factor f;
      f.node = n;
      std::vector<LinkTerm> terms = ctx.terms(n);
      const auto cap = static_cast<std::size_t>(std::max(1, cfg.local_cap_log2 - 1));
      if (terms.size() > cap) {
        // Keep the heaviest receivers; the rest never count as available.
        std::stable_sort(terms.begin(), terms.end(),
                         [](const LinkTerm& a, const LinkTerm& b) { return a.w_full > b.w_full; });
        terms.resize(cap);
        truncated_ = true;
      }
      std::sort(terms.begin(), terms.end(), [](const LinkTerm& a, const LinkTerm& b) { return a.rx < b.rx; });
      f.scope.push_back(n);
      for (const LinkTerm& t : terms) {
        f.scope.push_back(t.rx);
        f.rx_mask |= bit(t.rx);
        f.w_single.push_back(t.w_full / scale_);
        f.w_add.push_back((policy == PowerPolicy::SplitPower ? t.w_split : t.w_full) / scale_);
      }
      f.first_edge = edges_;
      edges_ += f.scope.size();
      for (std::size_t k = 0; k < f.scope.size(); ++k)
        var_edges_[static_cast<std::size_t>(f.scope[k])].push_back(f.first_edge + k);
      if (policy == PowerPolicy::Waterfilling && cfg.kernel == MpKernel::Structured) build_table(f);
      factors_.push_back(std::move(f));
    }
    f2v_.assign(edges_, Msg{0.0, 0.0});
    v2f_.assign(edges_, Msg{0.0, 0.0});
  }

  bool truncated() const { return truncated_; }

  // One synchronous sweep. Returns the largest factor-message change.
  double iterate() {
    std::vector<Msg> totals = beliefs();
    for (std::size_t v = 0; v < var_edges_.size(); ++v) {
      for (std::size_t e : var_edges_[v]) {
        Msg m{totals[v][0] - f2v_[e][0], totals[v][1] - f2v_[e][1]};
        normalize(m);
        v2f_[e] = m;
      }
    }
    double delta = 0.0;
    std::vector<Msg> out;
    for (const Factor& f : factors_) {
      out.assign(f.scope.size(), Msg{0.0, 0.0});
      if (cfg_.kernel == MpKernel::Generic) {
        generic_kernel(f, out);
      } else {
        structured_kernel(f, out);
      }
      for (std::size_t k = 0; k < out.size(); ++k) {
        normalize(out[k]);
        delta = std::max(delta, change(out[k], f2v_[f.first_edge + k]));
        f2v_[f.first_edge + k] = out[k];
      }
    }
    return delta;
  }

  std::vector<Msg> beliefs() const {
    std::vector<Msg> b(var_edges_.size(), Msg{0.0, 0.0});
    for (std::size_t v = 0; v < var_edges_.size(); ++v) {
      for (std::size_t e : var_edges_[v]) {
        b[v][0] += f2v_[e][0];
        b[v][1] += f2v_[e][1];
      }
    }
    return b;
  }

 private:
  struct Factor {
    int node = 0;
    std::vector<int> scope;
    RoleMask rx_mask = 0;
    std::vector<double> w_single;  // scaled Q c(1) per receiver (scope[k+1])
    std::vector<double> w_add;     // scaled additive weight per receiver
    std::vector<double> table;     // scaled transmitter weight per receiver subset
    std::size_t first_edge = 0;
  };

  RoleMask global_subset(const Factor& f, std::uint64_t local) const {
    RoleMask g = 0;
    for (std::size_t k = 0; k + 1 < f.scope.size(); ++k)
      if ((local >> k) & 1U) g |= bit(f.scope[k + 1]);
    return g;
  }

  void build_table(Factor& f) const {
    const std::size_t d = f.scope.size() - 1;
    f.table.resize(std::size_t{1} << d);
    for (std::uint64_t a = 0; a < f.table.size(); ++a)
      f.table[a] = ctx_.transmitter_weight(f.node, global_subset(f, a), policy_) / scale_;
  }

  // Reference: enumerate every assignment of the factor scope.
  void generic_kernel(const Factor& f, std::vector<Msg>& out) const {
    const std::size_t k = f.scope.size();
    for (auto& m : out) m = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << k); ++a) {
      RoleMask roles = 0;
      for (std::size_t j = 0; j < k; ++j)
        if ((a >> j) & 1U) roles |= bit(f.scope[j]);
      // Receivers outside the kept scope are never available.
      const RoleMask avail = ~roles & f.rx_mask;
      const double fv = has_bit(roles, f.node) ? ctx_.transmitter_weight(f.node, avail, policy_) / scale_ : 0.0;
      double total = -fv;
      for (std::size_t j = 0; j < k; ++j) total += v2f_[f.first_edge + j][(a >> j) & 1U];
      for (std::size_t j = 0; j < k; ++j) {
        const unsigned s = (a >> j) & 1U;
        out[j][s] = std::min(out[j][s], total - v2f_[f.first_edge + j][s]);
      }
    }
  }

  // Minimizes G(A) = -w(A) + sum_{u in A} delta_u over receiver subsets A,
  // overall and with each receiver forced in or out.
  void minimize_subsets(const Factor& f, const std::vector<double>& delta, double& g_min, std::vector<double>& g_in,
                        std::vector<double>& g_out) const {
    const std::size_t d = delta.size();
    const double inf = std::numeric_limits<double>::infinity();
    g_in.assign(d, inf);
    g_out.assign(d, inf);
    g_min = inf;
    switch (policy_) {
      case PowerPolicy::SplitPower:
      case PowerPolicy::OverPower: {
        g_min = 0.0;
        for (std::size_t u = 0; u < d; ++u) g_min += std::min(0.0, delta[u] - f.w_add[u]);
        for (std::size_t u = 0; u < d; ++u) {
          const double own = std::min(0.0, delta[u] - f.w_add[u]);
          g_in[u] = g_min - own + delta[u] - f.w_add[u];
          g_out[u] = g_min - own;
        }
        return;
      }
      case PowerPolicy::SingleDest: {
        // Optimal sets: every receiver with delta < 0, plus at most one more
        // as the max-weight receiver.
        auto solve = [&](std::size_t forced, int mode) {
          double base = 0.0, wmax = 0.0;
          for (std::size_t u = 0; u < d; ++u) {
            const bool in = (u == forced && mode == 1) || (delta[u] < 0.0 && !(u == forced && mode == 0));
            if (in) {
              base += delta[u];
              wmax = std::max(wmax, f.w_single[u]);
            }
          }
          double best = base - wmax;
          for (std::size_t u = 0; u < d; ++u) {
            if (u == forced || delta[u] < 0.0) continue;
            best = std::min(best, base + delta[u] - std::max(wmax, f.w_single[u]));
          }
          return best;
        };
        g_min = solve(d, -1);
        for (std::size_t u = 0; u < d; ++u) {
          g_in[u] = solve(u, 1);
          g_out[u] = solve(u, 0);
        }
        return;
      }
      case PowerPolicy::Waterfilling: {
        std::vector<double> sum(f.table.size(), 0.0);
        for (std::uint64_t a = 1; a < sum.size(); ++a) {
          const int low = std::countr_zero(a);
          sum[a] = sum[a & (a - 1)] + delta[static_cast<std::size_t>(low)];
        }
        for (std::uint64_t a = 0; a < sum.size(); ++a) {
          const double g = sum[a] - f.table[a];
          g_min = std::min(g_min, g);
          for (std::size_t u = 0; u < d; ++u) {
            double& slot = ((a >> u) & 1U) ? g_in[u] : g_out[u];
            slot = std::min(slot, g);
          }
        }
        return;
      }
    }
  }

  void structured_kernel(const Factor& f, std::vector<Msg>& out) const {
    const std::size_t d = f.scope.size() - 1;
    const Msg self = v2f_[f.first_edge];
    std::vector<double> delta(d);
    double b_sum = 0.0, free_sum = 0.0;
    for (std::size_t u = 0; u < d; ++u) {
      const Msg& m = v2f_[f.first_edge + 1 + u];
      delta[u] = m[0] - m[1];
      b_sum += m[1];
      free_sum += std::min(m[0], m[1]);
    }
    double g_min = 0.0;
    std::vector<double> g_in, g_out;
    minimize_subsets(f, delta, g_min, g_in, g_out);
    out[0] = {free_sum, b_sum + g_min};
    for (std::size_t u = 0; u < d; ++u) {
      const Msg& m = v2f_[f.first_edge + 1 + u];
      const double idle = self[0] + free_sum - std::min(m[0], m[1]);
      const double rest_b = b_sum - m[1];
      out[1 + u] = {std::min(idle, self[1] + rest_b + g_in[u] - delta[u]), std::min(idle, self[1] + rest_b + g_out[u])};
    }
  }

  const WeightContext& ctx_;
  PowerPolicy policy_;
  MpConfig cfg_;
  double scale_;
  std::vector<Factor> factors_;
  std::vector<std::vector<std::size_t>> var_edges_;
  std::vector<Msg> f2v_, v2f_;
  std::size_t edges_ = 0;
  bool truncated_ = false;
};

/// Additive policies only: -s_n W_n as a unary cost plus (w_nm + w_mn) s_n s_m
/// per neighboring pair.
class PairwiseGraph {
 public:
  PairwiseGraph(const WeightContext& ctx, PowerPolicy policy, double scale) {
    const int n_nodes = ctx.num_nodes();
    unary_.assign(static_cast<std::size_t>(n_nodes), Msg{0.0, 0.0});
    var_edges_.assign(static_cast<std::size_t>(n_nodes), {});
    std::vector<double> coupling(static_cast<std::size_t>(n_nodes * n_nodes), 0.0);
    for (int n = 0; n < n_nodes; ++n) {
      for (const LinkTerm& t : ctx.terms(n)) {
        const double w = (policy == PowerPolicy::SplitPower ? t.w_split : t.w_full) / scale;
        unary_[static_cast<std::size_t>(n)][1] -= w;
        const int a = std::min(n, t.rx), b = std::max(n, t.rx);
        coupling[static_cast<std::size_t>(a * n_nodes + b)] += w;
      }
    }
    for (int a = 0; a < n_nodes; ++a) {
      for (int b = a + 1; b < n_nodes; ++b) {
        const double j = coupling[static_cast<std::size_t>(a * n_nodes + b)];
        if (j <= 0.0) continue;
        const std::size_t p = pairs_.size();
        pairs_.push_back(Pair{a, b, j});
        var_edges_[static_cast<std::size_t>(a)].push_back(2 * p);
        var_edges_[static_cast<std::size_t>(b)].push_back(2 * p + 1);
      }
    }
    f2v_.assign(2 * pairs_.size(), Msg{0.0, 0.0});
  }

  double iterate() {
    const std::vector<Msg> totals = beliefs();
    std::vector<Msg> next(f2v_.size());
    double delta = 0.0;
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const Pair& pr = pairs_[p];
      for (int side = 0; side < 2; ++side) {
        const int from = side == 0 ? pr.b : pr.a;  // message into the other end
        const std::size_t from_edge = 2 * p + (side == 0 ? 1 : 0);
        Msg in{totals[static_cast<std::size_t>(from)][0] - f2v_[from_edge][0],
               totals[static_cast<std::size_t>(from)][1] - f2v_[from_edge][1]};
        Msg m{std::min(in[0], in[1]), std::min(in[0], pr.j + in[1])};
        normalize(m);
        const std::size_t to_edge = 2 * p + static_cast<std::size_t>(side);
        delta = std::max(delta, change(m, f2v_[to_edge]));
        next[to_edge] = m;
      }
    }
    f2v_ = std::move(next);
    return delta;
  }

  std::vector<Msg> beliefs() const {
    std::vector<Msg> b = unary_;
    for (std::size_t v = 0; v < var_edges_.size(); ++v) {
      for (std::size_t e : var_edges_[v]) {
        b[v][0] += f2v_[e][0];
        b[v][1] += f2v_[e][1];
      }
    }
    return b;
  }

 private:
  struct Pair {
    int a, b;
    double j;
  };
  std::vector<Msg> unary_;
  std::vector<Pair> pairs_;
  std::vector<std::vector<std::size_t>> var_edges_;  // edge 2p -> a, 2p+1 -> b
  std::vector<Msg> f2v_;
};

template <typename Graph>
MpResult iterate_graph(Graph& graph, const WeightContext& ctx, PowerPolicy policy, const MpConfig& cfg) {
  const int warmup = cfg.warmup < 0 ? ctx.num_nodes() : cfg.warmup;
  MpResult res;
  RoleMask best_roles = 0;
  double best_weight = 0.0;
  std::vector<RoleMask> history;
  RoleMask chosen = 0;
  bool done = false;
  for (int it = 1; it <= cfg.max_iters && !done; ++it) {
    const double delta = graph.iterate();
    const std::vector<Msg> b = graph.beliefs();
    RoleMask roles = 0;
    for (std::size_t v = 0; v < b.size(); ++v)
      if (decode(b[v])) roles |= bit(static_cast<int>(v));
    const double w = ctx.weight(roles, policy);
    if (w > best_weight) {
      best_weight = w;
      best_roles = roles;
    }
    history.push_back(roles);
    res.iterations = it;
    const std::size_t h = history.size();
    if (delta < cfg.tol) {
      res.termination = MpTermination::Converged;
      chosen = roles;
      done = true;
    } else if (it >= warmup && h >= 3 && history[h - 1] == history[h - 2] && history[h - 2] == history[h - 3]) {
      res.termination = MpTermination::Stable;
      chosen = roles;
      done = true;
    } else if (it >= warmup && h >= 3 && history[h - 1] == history[h - 3] && history[h - 1] != history[h - 2]) {
      res.termination = MpTermination::Oscillation;
      const double w_prev = ctx.weight(history[h - 2], policy);
      chosen = w_prev > w ? history[h - 2] : roles;
      done = true;
    }
  }
  if (!done) {
    res.termination = MpTermination::IterationCap;
    chosen = best_roles;
  }
  res.schedule = make_schedule(ctx, chosen, policy);
  return res;
}

}  // namespace

MpResult run_mp(const WeightContext& ctx, PowerPolicy policy, const MpConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("MP needs at least one iteration");
  double scale = 0.0;
  for (int n = 0; n < ctx.num_nodes(); ++n)
    for (const LinkTerm& t : ctx.terms(n)) scale = std::max(scale, t.w_full);
  if (scale <= 0.0) {
    MpResult res;
    res.schedule = make_schedule(ctx, 0, policy);
    res.iterations = 0;
    res.termination = MpTermination::Converged;
    return res;
  }
  if (cfg.factorization == Factorization::Pairwise) {
    if (policy != PowerPolicy::SplitPower && policy != PowerPolicy::OverPower)
      throw std::invalid_argument("pairwise factorization needs an additive power policy");
    PairwiseGraph graph(ctx, policy, scale);
    return iterate_graph(graph, ctx, policy, cfg);
  }
  NodeFactorGraph graph(ctx, policy, cfg, scale);
  MpResult res = iterate_graph(graph, ctx, policy, cfg);
  res.truncated_factor = graph.truncated();
  return res;
}

}  // namespace bpmm
