#include "ilora/apn.hpp"

#include <iostream>

#include "ilora/url.hpp"

namespace ilora::apn {

using frame::Frame;
using frame::FrameType;

void ApnConfig::validate() const {
  if (max_frame_bytes <= frame::kHeaderBytes || max_frame_bytes > frame::kDefaultMaxFrameBytes) {
    throw std::invalid_argument("max_frame_bytes must be in 6..255");
  }
  if (coordinator_id == node_id) throw std::invalid_argument("coordinator_id equals node_id");
  if (request_timeout <= Duration::zero()) throw std::invalid_argument("request_timeout must be positive");
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Idle: return "IDLE";
    case Status::Pending: return "PENDING";
    case Status::Receiving: return "RECEIVING";
    case Status::Complete: return "COMPLETE";
    case Status::Error: return "ERROR";
    case Status::Timeout: return "TIMEOUT";
  }
  return "?";
}

int ApnError::http_status() const {
  switch (code_) {
    case Code::InvalidUrl: return 400;
    case Code::UrlTooLong: return 414;
    case Code::Busy: return 409;
  }
  return 400;
}

Bytes AssemblyState::content() const {
  Bytes out;
  std::uint8_t expect = 0;
  for (const auto& [id, bytes] : chunks) {
    if (id != expect) break;
    out.insert(out.end(), bytes.begin(), bytes.end());
    ++expect;
  }
  return out;
}

AccessPoint::AccessPoint(ApnConfig cfg, link::Transport& transport, link::Scheduler& scheduler, EventLog* log)
    : cfg_(std::move(cfg)), transport_(transport), scheduler_(scheduler), log_(log) {
  cfg_.validate();
}

AccessPoint::~AccessPoint() {
  transport_.set_receiver({});
  std::lock_guard lock(mu_);
  if (timeout_timer_ != 0) scheduler_.cancel(timeout_timer_);
}

void AccessPoint::start() {
  transport_.set_receiver([this](Bytes bytes, Time at) { on_bytes(bytes, at); });
}

void AccessPoint::emit(const char* event, Time t, nlohmann::json detail) {
  if (log_) log_->emit(event, cfg_.node_id, state_.request_id, t, std::move(detail));
}

std::uint8_t AccessPoint::submit_url(std::string_view url) {
  if (!net::parse_url(url) || !frame::is_valid_utf8({reinterpret_cast<const std::uint8_t*>(url.data()), url.size()})) {
    throw ApnError(ApnError::Code::InvalidUrl, "not an absolute http(s) URL");
  }
  if (url.size() > cfg_.max_url_bytes()) {
    throw ApnError(ApnError::Code::UrlTooLong, "URL is " + std::to_string(url.size()) + " bytes, limit " +
                                                   std::to_string(cfg_.max_url_bytes()));
  }

  std::lock_guard lock(mu_);
  if (state_.in_flight()) throw ApnError(ApnError::Code::Busy, "a request is already in flight");
  if (timeout_timer_ != 0) scheduler_.cancel(timeout_timer_);

  const std::uint8_t rid = next_request_id_++;
  state_ = AssemblyState{};
  state_.request_id = rid;
  state_.url = std::string(url);
  state_.status = Status::Pending;
  any_request_ = true;

  Bytes wire = frame::encode_frame(Frame::request(cfg_.node_id, cfg_.coordinator_id, rid, url), cfg_.max_frame_bytes);
  timeout_timer_ = scheduler_.post([this, rid, wire = std::move(wire)] {
    std::lock_guard lock(mu_);
    if (state_.request_id != rid || !state_.in_flight()) return;
    Time start = scheduler_.now();
    try {
      start = transport_.send(wire).start;
    } catch (const link::LinkError& e) {
      std::cerr << "apn: REQUEST send failed: " << e.what() << '\n';
    }
    state_.started_at = start;
    emit(event::kUrlStart, start, {{"url", state_.url}});
    timeout_timer_ = scheduler_.schedule_at(start + cfg_.request_timeout, [this, rid] {
      std::lock_guard lock(mu_);
      timeout_timer_ = 0;
      if (state_.request_id == rid && state_.in_flight()) finish(Status::Timeout, scheduler_.now());
    });
  });
  return rid;
}

void AccessPoint::on_bytes(const Bytes& bytes, Time at) {
  auto f = frame::try_decode_frame(bytes, cfg_.max_frame_bytes);
  if (!f) return;
  on_frame(*f, at);
}

void AccessPoint::send_ack(const Frame& f, bool ok) {
  const auto ack = Frame::ack(cfg_.node_id, cfg_.coordinator_id, f.request_id, f.chunk_id, ok);
  try {
    transport_.send(frame::encode_frame(ack, cfg_.max_frame_bytes));
    ++acks_sent_;
  } catch (const link::LinkError& e) {
    std::cerr << "apn: ACK send failed: " << e.what() << '\n';
  }
}

void AccessPoint::finish(Status status, Time at) {
  state_.status = status;
  state_.completed_at = at;
  if (timeout_timer_ != 0) {
    scheduler_.cancel(timeout_timer_);
    timeout_timer_ = 0;
  }
  emit(event::kCompleted, at,
       {{"status", std::string(to_string(status))},
        {"http_status", state_.http_status ? nlohmann::json(*state_.http_status) : nlohmann::json()},
        {"chunks", state_.chunks.size()}});
}

void AccessPoint::on_frame(const Frame& f, Time at) {
  if (f.sender != cfg_.coordinator_id || f.recipient != cfg_.node_id) return;
  if (f.type != FrameType::Data && f.type != FrameType::Error) return;

  std::lock_guard lock(mu_);
  const bool current = any_request_ && f.request_id == state_.request_id && state_.in_flight();
  if (!current) {
    // Retransmission for a finished or abandoned request: acknowledge so the
    // coordinator can stop, keep nothing.
    send_ack(f, true);
    return;
  }

  auto first_response = [&] {
    if (state_.first_response_at) return;
    state_.first_response_at = at;
    emit(event::kUrlEnd, at);
  };

  if (f.type == FrameType::Error) {
    first_response();
    state_.http_status = f.error_status();
    send_ack(f, true);
    finish(Status::Error, at);
    return;
  }

  const std::size_t next = state_.chunks.size();
  if (f.chunk_id < next) {
    send_ack(f, true);  // duplicate after a lost ACK
    return;
  }
  if (f.chunk_id > next) {
    send_ack(f, false);
    return;
  }
  first_response();
  state_.chunks.emplace(f.chunk_id, f.payload);
  state_.last_seen = f.chunk_id;
  state_.status = Status::Receiving;
  state_.http_status = 200;
  send_ack(f, true);
  if (f.last) finish(Status::Complete, at);
}

ReceivedView AccessPoint::received_view() const {
  std::lock_guard lock(mu_);
  ReceivedView v;
  if (!any_request_) return v;
  v.request_id = state_.request_id;
  v.status = state_.status;
  v.chunks_received = state_.chunks.size();
  v.complete = state_.status == Status::Complete;
  v.http_status = state_.http_status;
  v.content = state_.content();
  return v;
}

AssemblyState AccessPoint::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::uint64_t AccessPoint::acks_sent() const {
  std::lock_guard lock(mu_);
  return acks_sent_;
}

}  // namespace ilora::apn
