#include "bpmm/milp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "bpmm/lp.hpp"

namespace bpmm {

// The relaxation solved at each node uses one role variable s_n per node:
//   x_l <= s_tx(l),  x_l + s_rx(l) <= 1,  0 <= x, s.
// Its binary solutions are exactly those of the linearized rows in the header
// (both say: no node both transmits and receives), and every linearized row
// is implied by it, so its LP bound is never weaker. Branching fixes s_n.

double role_objective(const MilpInstance& inst, RoleMask roles) {
  double w = 0.0;
  for (const MilpLink& l : inst.links)
    if (has_bit(roles, l.tx) && !has_bit(roles, l.rx)) w += l.weight;
  return w;
}

bool linearized_feasible(const MilpInstance& inst, const std::vector<char>& selected) {
  std::vector<double> inflow(static_cast<std::size_t>(inst.num_nodes), 0.0);
  for (std::size_t i = 0; i < inst.links.size(); ++i)
    if (selected[i]) inflow[static_cast<std::size_t>(inst.links[i].rx)] += 1.0;
  for (std::size_t i = 0; i < inst.links.size(); ++i) {
    if (!selected[i]) continue;
    const int n = inst.links[i].tx;
    const double deg = std::max(1, inst.degree[static_cast<std::size_t>(n)]);
    if (1.0 + inflow[static_cast<std::size_t>(n)] / deg > 1.0 + 1e-12) return false;
  }
  return true;
}

namespace {

struct BranchNode {
  std::vector<signed char> fix;  // -1 free, 0 receiver, 1 transmitter
  double bound = 0.0;
  std::uint64_t seq = 0;
};

struct ByBound {
  bool operator()(const BranchNode& a, const BranchNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.seq > b.seq;
  }
};

struct NodeLp {
  double constant = 0.0;
  std::vector<int> x_links;  // instance link per x column
  std::vector<int> s_nodes;  // node per s column
  LinearProgram lp;
};

NodeLp build_node_lp(const MilpInstance& inst, const std::vector<signed char>& fix) {
  NodeLp out;
  std::vector<int> s_col(static_cast<std::size_t>(inst.num_nodes), -1);
  for (std::size_t i = 0; i < inst.links.size(); ++i) {
    const MilpLink& l = inst.links[i];
    const signed char ft = fix[static_cast<std::size_t>(l.tx)];
    const signed char fr = fix[static_cast<std::size_t>(l.rx)];
    if (ft == 0 || fr == 1) continue;
    if (ft == 1 && fr == 0) {
      out.constant += l.weight;
      continue;
    }
    out.x_links.push_back(static_cast<int>(i));
    for (int n : {l.tx, l.rx}) {
      if (fix[static_cast<std::size_t>(n)] < 0 && s_col[static_cast<std::size_t>(n)] < 0) {
        s_col[static_cast<std::size_t>(n)] = static_cast<int>(out.s_nodes.size());
        out.s_nodes.push_back(n);
      }
    }
  }
  const auto nx = static_cast<Eigen::Index>(out.x_links.size());
  const auto ns = static_cast<Eigen::Index>(out.s_nodes.size());
  // Rows: one tx row when the transmitter is free, one rx row otherwise
  // (x + s_rx <= 1, or x <= 1 when the receiver is fixed).
  Eigen::Index rows = 0;
  for (int i : out.x_links) {
    const MilpLink& l = inst.links[static_cast<std::size_t>(i)];
    rows += (fix[static_cast<std::size_t>(l.tx)] < 0) + 1;
  }
  out.lp.a = Eigen::MatrixXd::Zero(rows, nx + ns);
  out.lp.b = Eigen::VectorXd::Zero(rows);
  out.lp.c = Eigen::VectorXd::Zero(nx + ns);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < nx; ++j) {
    const MilpLink& l = inst.links[static_cast<std::size_t>(out.x_links[static_cast<std::size_t>(j)])];
    out.lp.c(j) = l.weight;
    if (fix[static_cast<std::size_t>(l.tx)] < 0) {
      out.lp.a(r, j) = 1.0;
      out.lp.a(r, nx + s_col[static_cast<std::size_t>(l.tx)]) = -1.0;
      ++r;
    }
    out.lp.a(r, j) = 1.0;
    if (fix[static_cast<std::size_t>(l.rx)] < 0) out.lp.a(r, nx + s_col[static_cast<std::size_t>(l.rx)]) = 1.0;
    out.lp.b(r) = 1.0;
    ++r;
  }
  return out;
}

RoleMask fixed_transmitters(const std::vector<signed char>& fix) {
  RoleMask m = 0;
  for (std::size_t n = 0; n < fix.size(); ++n)
    if (fix[n] == 1) m |= bit(static_cast<int>(n));
  return m;
}

}  // namespace

MilpResult solve_milp(const MilpInstance& inst, const MilpOptions& opts) {
  if (inst.num_nodes > kMaxNodes) throw std::invalid_argument("solve_milp: too many nodes");
  for (const MilpLink& l : inst.links) {
    if (!(l.weight > 0.0)) throw std::invalid_argument("solve_milp: link weights must be positive");
    if (l.tx == l.rx || l.tx < 0 || l.rx < 0 || l.tx >= inst.num_nodes || l.rx >= inst.num_nodes)
      throw std::invalid_argument("solve_milp: bad link endpoints");
  }

  RoleMask best_roles = 0;
  double best = 0.0;
  auto offer = [&](RoleMask roles) {
    const double w = role_objective(inst, roles);
    if (w > best) {
      best = w;
      best_roles = roles;
    }
  };
  if (opts.incumbent_roles) offer(*opts.incumbent_roles);

  MilpResult result;
  std::priority_queue<BranchNode, std::vector<BranchNode>, ByBound> open;
  std::uint64_t seq = 0;
  open.push(BranchNode{std::vector<signed char>(static_cast<std::size_t>(inst.num_nodes), -1),
                       std::numeric_limits<double>::infinity(), seq++});
  auto pruned = [&](double bound) { return bound <= best + opts.relative_gap * std::abs(best); };

  bool exhausted = true;
  while (!open.empty()) {
    BranchNode node = open.top();
    open.pop();
    if (pruned(node.bound)) break;  // best-bound order: everything left is dominated too
    if (result.nodes >= opts.max_nodes) {
      exhausted = false;
      open.push(std::move(node));
      break;
    }
    ++result.nodes;

    const NodeLp nlp = build_node_lp(inst, node.fix);
    const LpSolution sol = solve_lp(nlp.lp);
    result.lp_pivots += static_cast<std::uint64_t>(sol.pivots);
    if (sol.status != LpStatus::Optimal) throw std::runtime_error("solve_milp: LP relaxation did not solve");
    const double bound = std::min(node.bound, nlp.constant + sol.objective);

    const auto nx = static_cast<Eigen::Index>(nlp.x_links.size());
    RoleMask rounded = fixed_transmitters(node.fix);
    RoleMask from_x = rounded;
    bool x_integral = true;
    for (Eigen::Index j = 0; j < nx; ++j) {
      const double v = sol.x(j);
      if (std::min(v, 1.0 - v) > opts.integrality_tol) x_integral = false;
      if (v > 0.5) from_x |= bit(inst.links[static_cast<std::size_t>(nlp.x_links[static_cast<std::size_t>(j)])].tx);
    }
    int branch = -1;
    double branch_frac = opts.integrality_tol;
    double branch_load = -1.0;
    for (std::size_t k = 0; k < nlp.s_nodes.size(); ++k) {
      const int n = nlp.s_nodes[k];
      const double v = sol.x(nx + static_cast<Eigen::Index>(k));
      if (v >= 0.5) rounded |= bit(n);
      const double frac = std::min(v, 1.0 - v);
      if (frac < branch_frac - 1e-12) continue;
      // Ties go to the node carrying the most weight, then the lowest id.
      double load = 0.0;
      for (const MilpLink& l : inst.links)
        if (l.tx == n || l.rx == n) load += l.weight;
      if (frac > branch_frac + 1e-12 || load > branch_load) {
        branch = n;
        branch_frac = frac;
        branch_load = load;
      }
    }
    offer(rounded);
    if (x_integral) offer(from_x);
    if (x_integral || branch < 0 || pruned(bound)) continue;

    for (signed char value : {1, 0}) {
      BranchNode child{node.fix, bound, seq++};
      child.fix[static_cast<std::size_t>(branch)] = value;
      open.push(std::move(child));
    }
  }

  result.objective = best;
  result.optimal = exhausted;
  result.bound = exhausted ? best : std::max(best, open.empty() ? best : open.top().bound);
  result.selected.assign(inst.links.size(), 0);
  for (std::size_t i = 0; i < inst.links.size(); ++i)
    result.selected[i] = has_bit(best_roles, inst.links[i].tx) && !has_bit(best_roles, inst.links[i].rx);
  return result;
}

MilpInstance make_milp_instance(const WeightContext& ctx, PowerPolicy policy) {
  if (policy != PowerPolicy::OverPower && policy != PowerPolicy::SplitPower)
    throw std::invalid_argument("MILP variants use OverPower or SplitPower weights");
  const Topology& topo = ctx.topology();
  MilpInstance inst;
  inst.num_nodes = topo.num_nodes();
  inst.degree.resize(static_cast<std::size_t>(inst.num_nodes));
  for (int n = 0; n < inst.num_nodes; ++n) {
    inst.degree[static_cast<std::size_t>(n)] = topo.degree(n);
    for (const LinkTerm& t : ctx.terms(n)) {
      const double w = policy == PowerPolicy::OverPower ? t.w_full : t.w_split;
      if (w > 0.0) inst.links.push_back(MilpLink{n, t.rx, w, t.link});
    }
  }
  return inst;
}

}  // namespace bpmm
