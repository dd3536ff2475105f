#include "ilora/channel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ilora::link {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw LinkError(LinkError::Code::BadConfig, key + ": expected a boolean, got '" + v + "'");
}

}  // namespace

void ChannelConfig::validate() const {
  lora.validate();
  if (!(loss_probability >= 0.0 && loss_probability <= 1.0))
    throw LinkError(LinkError::Code::BadConfig, "loss_probability must be in [0,1]");
  if (max_frame_bytes < 6) throw LinkError(LinkError::Code::BadConfig, "max_frame_bytes must be >= 6");
  if (max_frame_bytes > 255) throw LinkError(LinkError::Code::BadConfig, "max_frame_bytes must be <= 255");
  if (propagation_delay < Duration::zero())
    throw LinkError(LinkError::Code::BadConfig, "propagation_delay must be non-negative");
}

ChannelConfig ChannelConfig::parse(const std::string& text) {
  ChannelConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw LinkError(LinkError::Code::BadConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "frequency_hz") cfg.lora.frequency_hz = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "spreading_factor") cfg.lora.spreading_factor = std::stoi(value);
      else if (key == "bandwidth_hz") cfg.lora.bandwidth_hz = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "coding_rate") cfg.lora.coding_rate = std::stoi(value);
      else if (key == "preamble_symbols") cfg.lora.preamble_symbols = std::stoi(value);
      else if (key == "explicit_header") cfg.lora.explicit_header = parse_bool(key, value);
      else if (key == "crc_on") cfg.lora.crc_on = parse_bool(key, value);
      else if (key == "low_data_rate_optimize") cfg.lora.low_data_rate_optimize = parse_bool(key, value);
      else if (key == "loss_probability") cfg.loss_probability = std::stod(value);
      else if (key == "max_frame_bytes") cfg.max_frame_bytes = std::stoul(value);
      else if (key == "propagation_delay_us") cfg.propagation_delay = Duration(std::stoll(value));
      else if (key == "rng_seed") cfg.rng_seed = std::stoull(value);
      else if (key == "clock_mode") {
        if (value == "virtual") cfg.clock_mode = ClockMode::Virtual;
        else if (value == "real") cfg.clock_mode = ClockMode::Real;
        else throw LinkError(LinkError::Code::BadConfig, "clock_mode must be real or virtual");
      } else {
        throw LinkError(LinkError::Code::BadConfig, "unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw LinkError(LinkError::Code::BadConfig, "line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ChannelConfig ChannelConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LinkError(LinkError::Code::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// --- SimEndpoint ------------------------------------------------------------

std::size_t SimEndpoint::max_frame_bytes() const { return channel_->config().max_frame_bytes; }

TxRecord SimEndpoint::send(std::span<const std::uint8_t> bytes) {
  if (!attached()) throw LinkError(LinkError::Code::Detached, "endpoint detached");
  return channel_->send(id_, bytes);
}

TxRecord SimEndpoint::send_at(std::span<const std::uint8_t> bytes, Time at) {
  if (!attached()) throw LinkError(LinkError::Code::Detached, "endpoint detached");
  return channel_->send(id_, bytes, at);
}

void SimEndpoint::set_receiver(Receiver receiver) {
  std::lock_guard lock(mu_);
  receiver_ = std::move(receiver);
}

bool SimEndpoint::attached() const {
  std::lock_guard lock(mu_);
  return attached_;
}

void SimEndpoint::detach() {
  {
    std::lock_guard lock(mu_);
    attached_ = false;
  }
  cv_.notify_all();
}

void SimEndpoint::deliver(Bytes bytes, Time at) {
  Receiver receiver;
  {
    std::lock_guard lock(mu_);
    if (!attached_) return;
    if (!receiver_) {
      inbox_.push_back(Delivery{std::move(bytes), at});
      cv_.notify_all();
      return;
    }
    receiver = receiver_;
  }
  receiver(std::move(bytes), at);
}

std::optional<Delivery> SimEndpoint::recv(Duration timeout) {
  Scheduler& sched = channel_->scheduler();
  const Time deadline = sched.now() + timeout;

  auto pop = [this]() -> std::optional<Delivery> {
    if (!attached_) throw LinkError(LinkError::Code::Detached, "endpoint detached");
    if (inbox_.empty()) return std::nullopt;
    Delivery d = std::move(inbox_.front());
    inbox_.pop_front();
    return d;
  };

  if (sched.running()) {
    // Park until a frame arrives or the deadline event fires; the no-op timer
    // makes a virtual clock actually reach the deadline.
    auto wake = sched.schedule_at(deadline, [weak = weak_from_this()] {
      if (auto self = weak.lock()) self->cv_.notify_all();
    });
    std::unique_lock lock(mu_);
    for (;;) {
      if (auto d = pop()) {
        lock.unlock();
        sched.cancel(wake);
        return d;
      }
      if (sched.now() >= deadline) return std::nullopt;
      if (sched.mode() == ClockMode::Real) {
        cv_.wait_until(lock, std::chrono::steady_clock::now() + (deadline - sched.now()));
      } else {
        cv_.wait(lock);
      }
    }
  }

  for (;;) {
    {
      std::lock_guard lock(mu_);
      if (auto d = pop()) return d;
    }
    if (!sched.run_one(deadline)) {
      std::lock_guard lock(mu_);
      return pop();
    }
  }
}

// --- SimChannel -------------------------------------------------------------

SimChannel::SimChannel(ChannelConfig config, Scheduler& scheduler)
    : config_(std::move(config)), scheduler_(scheduler), rng_(config_.rng_seed) {
  config_.validate();
}

SimChannel::~SimChannel() {
  std::lock_guard lock(mu_);
  for (auto& [id, tx] : in_flight_) scheduler_.cancel(tx.timer);
  for (auto& [id, ep] : endpoints_) ep->detach();
}

std::shared_ptr<SimEndpoint> SimChannel::attach(NodeId id) {
  std::lock_guard lock(mu_);
  if (endpoints_.contains(id)) {
    throw LinkError(LinkError::Code::DuplicateNode, "node " + std::to_string(to_uint(id)) + " already attached");
  }
  auto ep = std::make_shared<SimEndpoint>(*this, id);
  endpoints_.emplace(id, ep);
  return ep;
}

void SimChannel::detach(NodeId id) {
  std::shared_ptr<SimEndpoint> ep;
  {
    std::lock_guard lock(mu_);
    auto it = endpoints_.find(id);
    if (it == endpoints_.end()) return;
    ep = it->second;
    endpoints_.erase(it);
  }
  ep->detach();
}

Duration SimChannel::airtime(std::size_t bytes) const { return time_on_air(bytes, config_.lora); }

void SimChannel::set_loss_probability(double p) {
  std::lock_guard lock(mu_);
  config_.loss_probability = p;
  config_.validate();
}

bool SimChannel::draw_loss() {
  // 53-bit uniform in [0,1); independent of the standard library's distributions
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return u < config_.loss_probability;
}

TxRecord SimChannel::send(NodeId from, std::span<const std::uint8_t> bytes, std::optional<Time> at) {
  if (bytes.size() > config_.max_frame_bytes) {
    throw LinkError(LinkError::Code::Oversize, std::to_string(bytes.size()) + "-byte frame exceeds " +
                                                   std::to_string(config_.max_frame_bytes));
  }
  const Time now = scheduler_.now();
  std::lock_guard lock(mu_);
  if (!endpoints_.contains(from)) throw LinkError(LinkError::Code::Detached, "sender not attached");

  Time start = std::max(at.value_or(now), now);
  if (auto busy = busy_until_.find(from); busy != busy_until_.end()) start = std::max(start, busy->second);
  const Time end = start + airtime(bytes.size());
  busy_until_[from] = end;

  Transmission tx{next_tx_++, from, Bytes(bytes.begin(), bytes.end()), start, end, draw_loss(), false, 0};
  for (auto& [id, other] : in_flight_) {
    if (tx.start < other.end && other.start < tx.end) {
      other.collided = true;
      tx.collided = true;
    }
  }
  trace_.push_back(TraceEvent{start, TraceKind::TxStart, tx.id, from, tx.bytes.size()});
  ++stats_.sent;

  const std::uint64_t id = tx.id;
  tx.timer = scheduler_.schedule_at(end + config_.propagation_delay, [this, id] { complete(id); });
  in_flight_.emplace(id, std::move(tx));
  return TxRecord{id, start, end};
}

void SimChannel::complete(std::uint64_t tx_id) {
  std::vector<std::shared_ptr<SimEndpoint>> receivers;
  Bytes bytes;
  Time at;
  {
    std::lock_guard lock(mu_);
    auto it = in_flight_.find(tx_id);
    if (it == in_flight_.end()) return;
    Transmission tx = std::move(it->second);
    in_flight_.erase(it);
    at = tx.end + config_.propagation_delay;
    if (tx.collided) {
      trace_.push_back(TraceEvent{at, TraceKind::Collided, tx.id, tx.sender, tx.bytes.size()});
      ++stats_.collided;
      return;
    }
    if (tx.lost) {
      trace_.push_back(TraceEvent{at, TraceKind::Lost, tx.id, tx.sender, tx.bytes.size()});
      ++stats_.lost;
      return;
    }
    ++stats_.delivered;
    for (auto& [node, ep] : endpoints_) {
      if (node == tx.sender) continue;
      trace_.push_back(TraceEvent{at, TraceKind::Delivered, tx.id, node, tx.bytes.size()});
      receivers.push_back(ep);
    }
    bytes = std::move(tx.bytes);
  }
  for (auto& ep : receivers) ep->deliver(bytes, at);
}

std::vector<TraceEvent> SimChannel::trace() const {
  std::lock_guard lock(mu_);
  return trace_;
}

ChannelStats SimChannel::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace ilora::link
