#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <netinet/in.h>
#include <string>
#include <thread>

#include "ilora/channel.hpp"
#include "ilora/scheduler.hpp"

namespace ilora::link {

/// Datagram tunnel for two-process deployments: each node owns one UDP
/// socket and frames travel verbatim as datagram payloads. Airtime and loss
/// are whatever the real network provides. Received frames are handed to the
/// receiver on the scheduler's thread.
class UdpTransport : public Transport {
 public:
  UdpTransport(NodeId id, const std::string& listen, std::map<NodeId, std::string> peers,
               Scheduler& scheduler, std::size_t max_frame_bytes = 255);
  ~UdpTransport() override;
  UdpTransport(const UdpTransport&) = delete;
  UdpTransport& operator=(const UdpTransport&) = delete;

  NodeId node_id() const override { return id_; }
  std::size_t max_frame_bytes() const override { return max_frame_bytes_; }
  /// Sends to the peer named by the frame's recipient byte, or to every peer
  /// when the recipient is unknown.
  TxRecord send(std::span<const std::uint8_t> bytes) override;
  void set_receiver(Receiver receiver) override;

  std::uint16_t local_port() const { return local_port_; }
  void add_peer(NodeId id, const std::string& address);

 private:
  void receive_loop();

  const NodeId id_;
  const std::size_t max_frame_bytes_;
  Scheduler& scheduler_;
  int fd_{-1};
  std::uint16_t local_port_{0};

  std::mutex mu_;
  std::map<NodeId, sockaddr_in> peers_;
  Receiver receiver_;
  std::uint64_t next_tx_{1};

  std::atomic<bool> stop_{false};
  std::thread rx_thread_;
};

/// "host:port" -> IPv4 socket address. Throws LinkError(BadConfig).
sockaddr_in resolve_udp_address(const std::string& address);

}  // namespace ilora::link
