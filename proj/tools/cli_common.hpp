#pragma once

#include <csignal>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilora/types.hpp"

namespace ilora::cli {

// Call before any thread starts so every thread inherits the mask.
inline sigset_t block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

inline void wait_for_termination(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline NodeId parse_node(const std::string& s) {
  const unsigned long v = std::stoul(s);
  if (v > 255) throw std::invalid_argument("node id out of range: " + s);
  return node(static_cast<unsigned>(v));
}

// "3=10.0.0.3:7000" entries
inline std::map<NodeId, std::string> parse_peer_addrs(const std::vector<std::string>& entries) {
  std::map<NodeId, std::string> out;
  for (const auto& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected ID=host:port, got " + e);
    out[parse_node(e.substr(0, eq))] = e.substr(eq + 1);
  }
  return out;
}

}  // namespace ilora::cli
