#include "ilora/udp.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "ilora/frame.hpp"

namespace ilora::link {

sockaddr_in resolve_udp_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw LinkError(LinkError::Code::BadConfig, "expected host:port, got " + address);
  std::string host = address.substr(0, colon);
  const std::string port = address.substr(colon + 1);
  if (host.empty() || host == "*") host = "0.0.0.0";
  if (port.empty() || port.size() > 5 || port.find_first_not_of("0123456789") != std::string::npos ||
      std::stoul(port) > 65535) {
    throw LinkError(LinkError::Code::BadConfig, "bad port in " + address);
  }

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0 || res == nullptr) {
    throw LinkError(LinkError::Code::BadConfig, "cannot resolve " + address + ": " + ::gai_strerror(rc));
  }
  sockaddr_in out{};
  std::memcpy(&out, res->ai_addr, sizeof(out));
  ::freeaddrinfo(res);
  return out;
}

UdpTransport::UdpTransport(NodeId id, const std::string& listen, std::map<NodeId, std::string> peers,
                           Scheduler& scheduler, std::size_t max_frame_bytes)
    : id_(id), max_frame_bytes_(max_frame_bytes), scheduler_(scheduler) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw LinkError(LinkError::Code::Io, std::string("socket: ") + std::strerror(errno));
  sockaddr_in local = resolve_udp_address(listen);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&local), sizeof(local)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw LinkError(LinkError::Code::Io, "bind " + listen + ": " + err);
  }
  socklen_t len = sizeof(local);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&local), &len);
  local_port_ = ntohs(local.sin_port);

  for (const auto& [peer, address] : peers) peers_[peer] = resolve_udp_address(address);
  rx_thread_ = std::thread([this] { receive_loop(); });
}

UdpTransport::~UdpTransport() {
  stop_ = true;
  if (rx_thread_.joinable()) rx_thread_.join();
  if (fd_ >= 0) ::close(fd_);
}

void UdpTransport::add_peer(NodeId id, const std::string& address) {
  auto addr = resolve_udp_address(address);
  std::lock_guard lock(mu_);
  peers_[id] = addr;
}

void UdpTransport::set_receiver(Receiver receiver) {
  std::lock_guard lock(mu_);
  receiver_ = std::move(receiver);
}

TxRecord UdpTransport::send(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > max_frame_bytes_) {
    throw LinkError(LinkError::Code::Oversize, std::to_string(bytes.size()) + "-byte frame exceeds " +
                                                   std::to_string(max_frame_bytes_));
  }
  std::vector<sockaddr_in> targets;
  TxRecord rec;
  {
    std::lock_guard lock(mu_);
    rec.id = next_tx_++;
    const bool addressed = bytes.size() >= frame::kHeaderBytes;
    auto it = addressed ? peers_.find(static_cast<NodeId>(bytes[2])) : peers_.end();
    if (it != peers_.end()) {
      targets.push_back(it->second);
    } else {
      for (const auto& [peer, addr] : peers_) targets.push_back(addr);
    }
  }
  for (const auto& addr : targets) {
    ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  }
  rec.start = rec.end = scheduler_.now();
  return rec;
}

void UdpTransport::receive_loop() {
  std::uint8_t buf[2048];
  while (!stop_) {
    pollfd pfd{fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 50) <= 0) continue;
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n <= 0) continue;
    Bytes bytes(buf, buf + n);
    scheduler_.post([this, bytes = std::move(bytes)]() mutable {
      Receiver receiver;
      {
        std::lock_guard lock(mu_);
        receiver = receiver_;
      }
      if (receiver) receiver(std::move(bytes), scheduler_.now());
    });
  }
}

}  // namespace ilora::link
