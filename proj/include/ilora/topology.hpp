#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "ilora/types.hpp"

namespace ilora::link {

/// Network N = (A, C, R): access points, coordinators, and the relation
/// saying which access point talks to which coordinator.
struct Topology {
  std::set<NodeId> access_points;
  std::set<NodeId> coordinators;
  std::set<std::pair<NodeId, NodeId>> relation;  // (access point, coordinator)

  /// Throws std::invalid_argument if A and C overlap, C is empty, a pair
  /// references an unknown node, or (when `star` is set) an access point is
  /// not related to exactly one coordinator.
  void validate(bool star = true) const;

  bool connected(NodeId access_point, NodeId coordinator) const;
  std::optional<NodeId> coordinator_of(NodeId access_point) const;
  std::set<NodeId> access_points_of(NodeId coordinator) const;

  /// Star: every access point related to the single coordinator.
  static Topology star(NodeId coordinator, std::vector<NodeId> access_points);
};

}  // namespace ilora::link
