#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ilora/channel.hpp"
#include "ilora/event_log.hpp"
#include "ilora/frame.hpp"
#include "ilora/scheduler.hpp"

namespace ilora::apn {

using namespace std::chrono_literals;

struct ApnConfig {
  NodeId node_id{node(2)};
  NodeId coordinator_id{node(1)};
  std::string http_listen{"127.0.0.1:8080"};
  Duration request_timeout{120s};
  std::size_t max_frame_bytes{frame::kDefaultMaxFrameBytes};

  std::size_t max_url_bytes() const { return max_frame_bytes - frame::kHeaderBytes; }
  void validate() const;  // throws std::invalid_argument
};

enum class Status { Idle, Pending, Receiving, Complete, Error, Timeout };

std::string_view to_string(Status s);

struct AssemblyState {
  std::uint8_t request_id{0};
  std::string url;
  std::optional<Time> started_at;         // REQUEST put on air
  std::optional<Time> first_response_at;  // first DATA or ERROR received
  std::optional<Time> completed_at;
  std::map<std::uint8_t, Bytes> chunks;
  std::optional<std::uint8_t> last_seen;
  Status status{Status::Idle};
  std::optional<int> http_status;

  bool in_flight() const { return status == Status::Pending || status == Status::Receiving; }
  /// Chunks 0..k concatenated. Always a prefix of the final body.
  Bytes content() const;
};

/// Snapshot served at /received.
struct ReceivedView {
  std::optional<std::uint8_t> request_id;
  Status status{Status::Idle};
  std::size_t chunks_received{0};
  bool complete{false};
  std::optional<int> http_status;
  Bytes content;
};

class ApnError : public std::runtime_error {
 public:
  enum class Code { InvalidUrl, UrlTooLong, Busy };
  ApnError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }
  int http_status() const;

 private:
  Code code_;
};

/// The access point: takes URL submissions, sends one REQUEST to its
/// coordinator, and acknowledges and assembles the chunks that come back.
/// submit_url and the views are safe from any thread; frames are handled on
/// the scheduler's thread.
class AccessPoint {
 public:
  AccessPoint(ApnConfig cfg, link::Transport& transport, link::Scheduler& scheduler, EventLog* log = nullptr);
  ~AccessPoint();
  AccessPoint(const AccessPoint&) = delete;
  AccessPoint& operator=(const AccessPoint&) = delete;

  /// Starts listening on the transport.
  void start();

  /// Validates and queues a REQUEST. Throws ApnError.
  std::uint8_t submit_url(std::string_view url);

  ReceivedView received_view() const;
  AssemblyState state() const;
  const ApnConfig& config() const { return cfg_; }
  std::uint64_t acks_sent() const;

  /// Frame handling, exposed for tests that feed frames directly.
  void on_frame(const frame::Frame& f, Time at);

 private:
  void on_bytes(const Bytes& bytes, Time at);
  void send_ack(const frame::Frame& f, bool ok);
  void finish(Status status, Time at);
  void emit(const char* event, Time t, nlohmann::json detail = nlohmann::json::object());

  const ApnConfig cfg_;
  link::Transport& transport_;
  link::Scheduler& scheduler_;
  EventLog* log_;

  mutable std::mutex mu_;
  AssemblyState state_;
  bool any_request_{false};
  std::uint8_t next_request_id_{0};
  link::Scheduler::TimerId timeout_timer_{0};
  std::uint64_t acks_sent_{0};
};

}  // namespace ilora::apn
