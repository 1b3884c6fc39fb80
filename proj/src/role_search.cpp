#include "bpmm/role_search.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bpmm {

std::string_view to_string(SearchKernel kernel) {
  switch (kernel) {
    case SearchKernel::Serial: return "serial";
    case SearchKernel::Parallel: return "parallel";
    case SearchKernel::Pruned: return "pruned";
  }
  return "?";
}

SearchKernel parse_search_kernel(std::string_view text) {
  if (text == "serial") return SearchKernel::Serial;
  if (text == "parallel") return SearchKernel::Parallel;
  if (text == "pruned") return SearchKernel::Pruned;
  throw std::invalid_argument("unknown search kernel: " + std::string(text));
}

namespace {

// Search space: the free nodes in ascending id order. Index bit (k-1-j) holds
// the role of free[j], so numeric index order is lexicographic role order.
struct Space {
  std::vector<int> free;

  explicit Space(const WeightContext& ctx) {
    for (RoleMask m = ctx.active_transmitters(); m; m &= m - 1) free.push_back(std::countr_zero(m));
  }

  int size() const { return static_cast<int>(free.size()); }

  RoleMask roles(std::uint64_t index) const {
    RoleMask r = 0;
    const int k = size();
    for (int j = 0; j < k; ++j)
      if ((index >> (k - 1 - j)) & 1U) r |= bit(free[static_cast<std::size_t>(j)]);
    return r;
  }
};

RoleSearchResult enumerate_serial(const WeightContext& ctx, PowerPolicy policy, const Space& space) {
  const std::uint64_t count = std::uint64_t{1} << space.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < count; ++i) best = std::max(best, ctx.weight(space.roles(i), policy));
  const double threshold = tie_threshold(best);
  for (std::uint64_t i = 0; i < count; ++i) {
    const RoleMask r = space.roles(i);
    const double w = ctx.weight(r, policy);
    if (w >= threshold) return RoleSearchResult{r, w, count + i + 1};
  }
  return {};
}

RoleSearchResult enumerate_parallel(const WeightContext& ctx, PowerPolicy policy, const Space& space) {
  const auto count = static_cast<std::int64_t>(std::uint64_t{1} << space.size());
  double best = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(max : best) schedule(static)
  for (std::int64_t i = 0; i < count; ++i)
    best = std::max(best, ctx.weight(space.roles(static_cast<std::uint64_t>(i)), policy));
  const double threshold = tie_threshold(best);
  std::int64_t first = count;
#pragma omp parallel for reduction(min : first) schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    if (i < first && ctx.weight(space.roles(static_cast<std::uint64_t>(i)), policy) >= threshold) first = i;
  }
  const RoleMask r = space.roles(static_cast<std::uint64_t>(first));
  return RoleSearchResult{r, ctx.weight(r, policy), static_cast<std::uint64_t>(2 * count)};
}

class BranchAndBound {
 public:
  BranchAndBound(const WeightContext& ctx, PowerPolicy policy, const Space& space)
      : ctx_(ctx), policy_(policy), free_(space.free) {}

  // Upper bound over completions of a prefix: decided transmitters keep every
  // undecided node as a receiver; undecided nodes count as transmitters too.
  double bound(RoleMask tx, RoleMask undecided) const {
    const RoleMask available = ~tx;
    double ub = 0.0;
    for (RoleMask m = tx | undecided; m; m &= m - 1) ub += ctx_.transmitter_weight(std::countr_zero(m), available, policy_);
    return ub;
  }

  // Pass 1: the maximum weight.
  double maximize(double incumbent) {
    best_ = incumbent;
    RoleMask undecided = 0;
    for (int n : free_) undecided |= bit(n);
    descend_max(0, 0, undecided);
    return best_;
  }

  // Pass 2: first role vector in lexicographic order reaching `threshold`.
  std::optional<RoleMask> first_reaching(double threshold) {
    threshold_ = threshold;
    RoleMask undecided = 0;
    for (int n : free_) undecided |= bit(n);
    found_.reset();
    descend_first(0, 0, undecided);
    return found_;
  }

  std::uint64_t visited() const { return visited_; }

 private:
  void descend_max(std::size_t depth, RoleMask tx, RoleMask undecided) {
    ++visited_;
    if (depth == free_.size()) {
      best_ = std::max(best_, ctx_.weight(tx, policy_));
      return;
    }
    if (bound(tx, undecided) <= best_) return;
    const RoleMask node = bit(free_[depth]);
    descend_max(depth + 1, tx | node, undecided & ~node);
    descend_max(depth + 1, tx, undecided & ~node);
  }

  void descend_first(std::size_t depth, RoleMask tx, RoleMask undecided) {
    if (found_) return;
    ++visited_;
    if (depth == free_.size()) {
      if (ctx_.weight(tx, policy_) >= threshold_) found_ = tx;
      return;
    }
    if (bound(tx, undecided) < threshold_) return;
    const RoleMask node = bit(free_[depth]);
    descend_first(depth + 1, tx, undecided & ~node);
    descend_first(depth + 1, tx | node, undecided & ~node);
  }

  const WeightContext& ctx_;
  PowerPolicy policy_;
  const std::vector<int>& free_;
  double best_ = 0.0;
  double threshold_ = 0.0;
  std::optional<RoleMask> found_;
  std::uint64_t visited_ = 0;
};

// Single-flip local search from the empty schedule; a cheap incumbent.
double greedy_incumbent(const WeightContext& ctx, PowerPolicy policy, const Space& space) {
  RoleMask roles = 0;
  double w = 0.0;
  for (bool improved = true; improved;) {
    improved = false;
    RoleMask best_roles = roles;
    double best_w = w;
    for (int n : space.free) {
      const RoleMask cand = roles ^ bit(n);
      const double cw = ctx.weight(cand, policy);
      if (cw > best_w) {
        best_w = cw;
        best_roles = cand;
      }
    }
    if (best_roles != roles) {
      roles = best_roles;
      w = best_w;
      improved = true;
    }
  }
  return w;
}

}  // namespace

RoleSearchResult search_roles(const WeightContext& ctx, PowerPolicy policy, SearchKernel kernel,
                              std::optional<RoleMask> hint) {
  const Space space(ctx);
  if (space.size() > 62) throw std::invalid_argument("role search space too large");
  switch (kernel) {
    case SearchKernel::Serial: return enumerate_serial(ctx, policy, space);
    case SearchKernel::Parallel: return enumerate_parallel(ctx, policy, space);
    case SearchKernel::Pruned: break;
  }
  double incumbent = std::max(0.0, greedy_incumbent(ctx, policy, space));
  if (hint) incumbent = std::max(incumbent, ctx.weight(*hint, policy));
  BranchAndBound bnb(ctx, policy, space);
  const double best = bnb.maximize(incumbent);
  const auto roles = bnb.first_reaching(tie_threshold(best));
  if (!roles) throw std::logic_error("role search lost its maximizer");
  return RoleSearchResult{*roles, ctx.weight(*roles, policy), bnb.visited()};
}

}  // namespace bpmm
