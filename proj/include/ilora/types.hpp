#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace ilora {

using Bytes = std::vector<std::uint8_t>;

// Node address on the constrained link.
enum class NodeId : std::uint8_t {};

constexpr NodeId node(unsigned v) { return static_cast<NodeId>(static_cast<std::uint8_t>(v)); }
constexpr unsigned to_uint(NodeId id) { return static_cast<unsigned>(id); }

// All link and metric timestamps are microseconds since the scheduler epoch.
using Duration = std::chrono::microseconds;
using Time = std::chrono::microseconds;

inline double to_seconds(Duration d) { return std::chrono::duration<double>(d).count(); }

inline Duration from_seconds(double s) {
  return std::chrono::round<Duration>(std::chrono::duration<double>(s));
}

inline Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(const Bytes& b) { return std::string(b.begin(), b.end()); }

}  // namespace ilora
