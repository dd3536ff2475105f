#include "ilora/topology.hpp"

#include <stdexcept>
#include <string>

namespace ilora::link {

void Topology::validate(bool star) const {
  if (coordinators.empty()) throw std::invalid_argument("topology needs at least one coordinator");
  for (NodeId a : access_points) {
    if (coordinators.contains(a)) {
      throw std::invalid_argument("node " + std::to_string(to_uint(a)) + " is both access point and coordinator");
    }
  }
  for (const auto& [a, c] : relation) {
    if (!access_points.contains(a) || !coordinators.contains(c)) {
      throw std::invalid_argument("relation references unknown node (" + std::to_string(to_uint(a)) + ", " +
                                  std::to_string(to_uint(c)) + ")");
    }
  }
  if (!star) return;
  for (NodeId a : access_points) {
    std::size_t links = 0;
    for (const auto& [pa, pc] : relation) links += (pa == a);
    if (links != 1) {
      throw std::invalid_argument("access point " + std::to_string(to_uint(a)) +
                                  " must connect to exactly one coordinator");
    }
  }
}

bool Topology::connected(NodeId access_point, NodeId coordinator) const {
  return relation.contains({access_point, coordinator});
}

std::optional<NodeId> Topology::coordinator_of(NodeId access_point) const {
  for (const auto& [a, c] : relation) {
    if (a == access_point) return c;
  }
  return std::nullopt;
}

std::set<NodeId> Topology::access_points_of(NodeId coordinator) const {
  std::set<NodeId> out;
  for (const auto& [a, c] : relation) {
    if (c == coordinator) out.insert(a);
  }
  return out;
}

Topology Topology::star(NodeId coordinator, std::vector<NodeId> access_points) {
  Topology t;
  t.coordinators.insert(coordinator);
  for (NodeId a : access_points) {
    t.access_points.insert(a);
    t.relation.emplace(a, coordinator);
  }
  t.validate();
  return t;
}

}  // namespace ilora::link
