#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilora/lora.hpp"
#include "ilora/scheduler.hpp"
#include "ilora/types.hpp"

namespace ilora::link {

class LinkError : public std::runtime_error {
 public:
  enum class Code { Oversize, Detached, DuplicateNode, BadConfig, Io };
  LinkError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct TxRecord {
  std::uint64_t id{0};
  Time start{0};
  Time end{0};  // transmission complete
};

struct Delivery {
  Bytes bytes;
  Time at{0};
};

/// One node's attachment to a datagram link. Frames are delivered either to
/// the receiver callback (on the scheduler's thread) or, if none is set, to
/// an inbox drained by blocking receive calls.
class Transport {
 public:
  using Receiver = std::function<void(Bytes, Time)>;

  virtual ~Transport() = default;
  virtual NodeId node_id() const = 0;
  virtual std::size_t max_frame_bytes() const = 0;
  /// Transmits now (or as soon as this node's radio is free).
  virtual TxRecord send(std::span<const std::uint8_t> bytes) = 0;
  virtual void set_receiver(Receiver receiver) = 0;
};

struct ChannelConfig {
  LoraParams lora;
  double loss_probability{0.0};
  std::size_t max_frame_bytes{255};
  Duration propagation_delay{0};
  ClockMode clock_mode{ClockMode::Virtual};
  std::uint64_t rng_seed{1};

  void validate() const;

  /// `key = value` lines; `#` starts a comment. Unknown keys are an error.
  static ChannelConfig parse(const std::string& text);
  static ChannelConfig load(const std::filesystem::path& path);
};

enum class TraceKind { TxStart, Delivered, Lost, Collided };

struct TraceEvent {
  Time time{0};
  TraceKind kind{TraceKind::TxStart};
  std::uint64_t tx_id{0};
  NodeId node{};  // sender, or the receiving node for Delivered
  std::size_t bytes{0};
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct ChannelStats {
  std::uint64_t sent{0};
  std::uint64_t delivered{0};  // frames, not per-receiver copies
  std::uint64_t lost{0};
  std::uint64_t collided{0};
};

class SimChannel;

class SimEndpoint : public Transport, public std::enable_shared_from_this<SimEndpoint> {
 public:
  SimEndpoint(SimChannel& channel, NodeId id) : channel_(&channel), id_(id) {}

  NodeId node_id() const override { return id_; }
  std::size_t max_frame_bytes() const override;
  TxRecord send(std::span<const std::uint8_t> bytes) override;
  TxRecord send_at(std::span<const std::uint8_t> bytes, Time at);
  void set_receiver(Receiver receiver) override;

  /// Next frame delivered to this node, or nullopt once `timeout` elapses.
  /// Pumps the scheduler itself when no driver thread is running.
  std::optional<Delivery> recv(Duration timeout);

  bool attached() const;

 private:
  friend class SimChannel;
  void deliver(Bytes bytes, Time at);
  void detach();

  SimChannel* channel_;
  const NodeId id_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Delivery> inbox_;
  Receiver receiver_;
  bool attached_{true};
};

/// Half-duplex broadcast medium with LoRa airtime, independent per-frame loss
/// and destructive collisions (any overlap destroys both frames).
class SimChannel {
 public:
  SimChannel(ChannelConfig config, Scheduler& scheduler);
  ~SimChannel();
  SimChannel(const SimChannel&) = delete;
  SimChannel& operator=(const SimChannel&) = delete;

  std::shared_ptr<SimEndpoint> attach(NodeId id);
  void detach(NodeId id);

  TxRecord send(NodeId from, std::span<const std::uint8_t> bytes, std::optional<Time> at = {});

  Duration airtime(std::size_t bytes) const;
  const ChannelConfig& config() const { return config_; }
  Scheduler& scheduler() { return scheduler_; }
  void set_loss_probability(double p);

  std::vector<TraceEvent> trace() const;
  ChannelStats stats() const;

 private:
  struct Transmission {
    std::uint64_t id;
    NodeId sender;
    Bytes bytes;
    Time start;
    Time end;
    bool lost;
    bool collided;
    Scheduler::TimerId timer;
  };

  void complete(std::uint64_t tx_id);
  bool draw_loss();

  ChannelConfig config_;
  Scheduler& scheduler_;

  mutable std::mutex mu_;
  std::map<NodeId, std::shared_ptr<SimEndpoint>> endpoints_;
  std::map<NodeId, Time> busy_until_;
  std::map<std::uint64_t, Transmission> in_flight_;
  std::vector<TraceEvent> trace_;
  ChannelStats stats_;
  std::mt19937_64 rng_;
  std::uint64_t next_tx_{1};
};

}  // namespace ilora::link
