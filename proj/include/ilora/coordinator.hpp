#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilora/channel.hpp"
#include "ilora/event_log.hpp"
#include "ilora/fetch.hpp"
#include "ilora/frame.hpp"
#include "ilora/scheduler.hpp"

namespace ilora::coord {

using namespace std::chrono_literals;

struct CoordinatorConfig {
  NodeId node_id{node(1)};
  std::set<NodeId> expected_senders;
  std::size_t chunk_capacity{250};
  int max_retries{3};  // per frame; -1 retries forever
  Duration ack_timeout{2s};
  Duration inter_chunk_delay{0};
  Duration fetch_timeout{10s};
  std::size_t max_content_bytes{0};  // 0: 256 * chunk_capacity
  Duration virtual_fetch_latency{0};  // RT charged on a virtual clock
  std::size_t max_frame_bytes{frame::kDefaultMaxFrameBytes};

  /// Largest body that is sent, rounded down to a chunk boundary.
  std::size_t content_limit() const;
  void validate() const;  // throws std::invalid_argument
};

enum class Verdict { Delivered, ErrorSent, RetriesExhausted };

std::string_view to_string(Verdict v);

struct SendReport {
  std::size_t chunks_total{0};
  std::size_t chunks_sent{0};   // distinct chunks put on air
  std::size_t chunks_acked{0};
  std::size_t retries_used{0};
  std::size_t transmissions{0};
  bool success{false};
};

/// What became of one accepted REQUEST.
struct Outcome {
  std::uint8_t request_id{0};
  NodeId requester{};
  std::string url;
  int http_status{0};  // origin status, or 400/502/504 for local failures
  std::size_t content_bytes{0};
  bool truncated{false};
  Verdict verdict{Verdict::Delivered};
  SendReport report;
  Time rt_start{0}, rt_end{0};
  std::optional<Time> lt_start, lt_end;
};

/// Local failures that never reach an origin become these ERROR statuses.
inline constexpr std::uint16_t kStatusBadUrl = 400;
inline constexpr std::uint16_t kStatusConnectFailed = 502;
inline constexpr std::uint16_t kStatusTimeout = 504;

/// The gateway node. Event driven on the scheduler's thread: a REQUEST from
/// an expected sender triggers a fetch, then the response goes out as DATA
/// frames (or one ERROR frame), one at a time, each held until its ACK.
/// REQUESTs that arrive while an exchange is running are dropped.
class Coordinator {
 public:
  Coordinator(CoordinatorConfig cfg, link::Transport& transport, link::Scheduler& scheduler,
              EventLog* log = nullptr, net::Fetcher fetcher = {});
  ~Coordinator();
  Coordinator(const Coordinator&) = delete;
  Coordinator& operator=(const Coordinator&) = delete;

  /// Starts listening on the transport.
  void serve();

  bool busy() const;
  std::vector<Outcome> outcomes() const;
  std::optional<Outcome> last_outcome() const;
  CoordinatorConfig config() const;
  /// Replaces the configuration. Only while idle.
  void reconfigure(CoordinatorConfig cfg);

  /// Called on the loop thread whenever a REQUEST is accepted.
  void on_request(std::function<void(const frame::Frame&)> hook);
  /// Called on the loop thread when an exchange ends.
  void on_outcome(std::function<void(const Outcome&)> hook);

 private:
  struct Exchange {
    Outcome outcome;
    std::vector<frame::Frame> frames;
    std::size_t index{0};
    int attempts{0};  // transmissions of frames[index]
    bool awaiting_ack{false};
    link::Scheduler::TimerId timer{0};
  };

  void on_bytes(const Bytes& bytes, Time at);
  void handle_request(const frame::Frame& req, Time at);
  void on_fetched(std::optional<net::FetchResult> result, int failure_status);
  void begin_sending(std::vector<frame::Frame> frames);
  void transmit();
  void on_ack(const frame::Frame& ack);
  void on_ack_timeout();
  void retry();
  void finish(Verdict verdict);
  void emit(const char* event, Time t, nlohmann::json detail = nlohmann::json::object());

  CoordinatorConfig cfg_;
  link::Transport& transport_;
  link::Scheduler& scheduler_;
  EventLog* log_;
  net::Fetcher fetcher_;

  mutable std::mutex mu_;
  std::optional<Exchange> ex_;
  bool fetching_{false};
  std::vector<Outcome> outcomes_;
  std::function<void(const frame::Frame&)> request_hook_;
  std::function<void(const Outcome&)> outcome_hook_;
};

}  // namespace ilora::coord
