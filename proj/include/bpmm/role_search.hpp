#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "bpmm/power.hpp"

namespace bpmm {

/// How the 2^N role space is searched. All kernels return the same role
/// vector: the lexicographically smallest (s_0 compared first) among those
/// whose weight is within kTieTolerance (relative) of the maximum.
enum class SearchKernel { Serial, Parallel, Pruned };

std::string_view to_string(SearchKernel kernel);
SearchKernel parse_search_kernel(std::string_view text);

inline constexpr double kTieTolerance = 1e-9;

/// Weight threshold that a role vector must reach to tie with `best`.
inline double tie_threshold(double best) { return best - kTieTolerance * (best < 0 ? -best : best); }

struct RoleSearchResult {
  RoleMask roles = 0;
  double weight = 0.0;
  std::uint64_t visited = 0;  // leaves (enumeration) or tree nodes (pruned)
};

/// Exact argmax over role vectors of ctx.weight(s, policy). Nodes without a
/// positive-pressure out-link are fixed to 0, which never loses optimality
/// and always wins the tie-break. `hint` is a candidate role vector whose
/// weight seeds the pruning threshold; it does not affect the result.
RoleSearchResult search_roles(const WeightContext& ctx, PowerPolicy policy, SearchKernel kernel,
                              std::optional<RoleMask> hint = std::nullopt);

}  // namespace bpmm
