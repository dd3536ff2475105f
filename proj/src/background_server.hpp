#pragma once

#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

namespace ilora::detail {

// httplib::Server listening on its own thread. "host:port" with port 0 binds
// an ephemeral port.
class BackgroundServer {
 public:
  httplib::Server& server() { return server_; }

  void start(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected host:port, got " + listen);
    std::string host = listen.substr(0, colon);
    if (host.empty() || host == "*") host = "0.0.0.0";
    const int wanted = std::stoi(listen.substr(colon + 1));

    if (wanted == 0) {
      port_ = server_.bind_to_any_port(host);
    } else {
      port_ = server_.bind_to_port(host, wanted) ? wanted : -1;
    }
    if (port_ <= 0) throw std::runtime_error("cannot bind HTTP listener on " + listen);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }

  ~BackgroundServer() { stop(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_{-1};
};

}  // namespace ilora::detail
