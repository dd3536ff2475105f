#include "ilora/coordinator.hpp"

#include <iostream>

#include "ilora/simplify.hpp"
#include "ilora/url.hpp"

namespace ilora::coord {

using frame::Frame;
using frame::FrameType;

std::size_t CoordinatorConfig::content_limit() const {
  const std::size_t ceiling = frame::kMaxChunks * chunk_capacity;
  const std::size_t limit = max_content_bytes == 0 ? ceiling : std::min(max_content_bytes, ceiling);
  return limit / chunk_capacity * chunk_capacity;
}

void CoordinatorConfig::validate() const {
  if (max_frame_bytes <= frame::kHeaderBytes || max_frame_bytes > frame::kDefaultMaxFrameBytes) {
    throw std::invalid_argument("max_frame_bytes must be in 6..255");
  }
  if (chunk_capacity < 1 || chunk_capacity > max_frame_bytes - frame::kHeaderBytes) {
    throw std::invalid_argument("chunk_capacity must be in 1.." + std::to_string(max_frame_bytes - frame::kHeaderBytes));
  }
  if (max_retries < -1) throw std::invalid_argument("max_retries must be >= 0, or -1 for unlimited");
  if (ack_timeout <= Duration::zero()) throw std::invalid_argument("ack_timeout must be positive");
  if (inter_chunk_delay < Duration::zero()) throw std::invalid_argument("inter_chunk_delay must be >= 0");
  if (fetch_timeout <= Duration::zero()) throw std::invalid_argument("fetch_timeout must be positive");
  if (virtual_fetch_latency < Duration::zero()) throw std::invalid_argument("virtual_fetch_latency must be >= 0");
  if (expected_senders.empty()) throw std::invalid_argument("expected_senders is empty");
  if (expected_senders.contains(node_id)) throw std::invalid_argument("coordinator listed as its own sender");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Delivered: return "delivered";
    case Verdict::ErrorSent: return "error_sent";
    case Verdict::RetriesExhausted: return "retries_exhausted";
  }
  return "?";
}

Coordinator::Coordinator(CoordinatorConfig cfg, link::Transport& transport, link::Scheduler& scheduler,
                         EventLog* log, net::Fetcher fetcher)
    : cfg_(std::move(cfg)), transport_(transport), scheduler_(scheduler), log_(log), fetcher_(std::move(fetcher)) {
  cfg_.validate();
  if (!fetcher_) {
    fetcher_ = [](const std::string& url, Duration timeout) { return net::fetch_url(url, timeout); };
  }
}

Coordinator::~Coordinator() {
  transport_.set_receiver({});
  std::lock_guard lock(mu_);
  if (ex_ && ex_->timer != 0) scheduler_.cancel(ex_->timer);
}

void Coordinator::serve() {
  transport_.set_receiver([this](Bytes bytes, Time at) { on_bytes(bytes, at); });
}

bool Coordinator::busy() const {
  std::lock_guard lock(mu_);
  return fetching_ || ex_.has_value();
}

std::vector<Outcome> Coordinator::outcomes() const {
  std::lock_guard lock(mu_);
  return outcomes_;
}

std::optional<Outcome> Coordinator::last_outcome() const {
  std::lock_guard lock(mu_);
  if (outcomes_.empty()) return std::nullopt;
  return outcomes_.back();
}

CoordinatorConfig Coordinator::config() const {
  std::lock_guard lock(mu_);
  return cfg_;
}

void Coordinator::reconfigure(CoordinatorConfig cfg) {
  cfg.validate();
  std::lock_guard lock(mu_);
  if (fetching_ || ex_) throw std::logic_error("reconfigure while an exchange is running");
  cfg_ = std::move(cfg);
}

void Coordinator::on_request(std::function<void(const Frame&)> hook) {
  std::lock_guard lock(mu_);
  request_hook_ = std::move(hook);
}

void Coordinator::on_outcome(std::function<void(const Outcome&)> hook) {
  std::lock_guard lock(mu_);
  outcome_hook_ = std::move(hook);
}

void Coordinator::emit(const char* event, Time t, nlohmann::json detail) {
  if (log_ == nullptr) return;
  const std::uint8_t rid = ex_ ? ex_->outcome.request_id : 0;
  log_->emit(event, cfg_.node_id, rid, t, std::move(detail));
}

void Coordinator::on_bytes(const Bytes& bytes, Time at) {
  std::function<void(const Frame&)> hook;
  std::optional<Frame> f;
  {
    std::lock_guard lock(mu_);
    f = frame::try_decode_frame(bytes, cfg_.max_frame_bytes);
    if (!f || f->recipient != cfg_.node_id) return;

    if (f->type == FrameType::Ack) {
      on_ack(*f);
      return;
    }
    if (f->type != FrameType::Request) return;
    if (!cfg_.expected_senders.contains(f->sender)) return;
    if (fetching_ || ex_) {
      if (log_) {
        log_->emit("request_dropped", cfg_.node_id, f->request_id, at, {{"sender", to_uint(f->sender)}});
      }
      return;
    }
    fetching_ = true;
    hook = request_hook_;
  }
  if (hook) hook(*f);
  handle_request(*f, at);
}

void Coordinator::handle_request(const Frame& req, Time at) {
  Outcome pending;
  pending.request_id = req.request_id;
  pending.requester = req.sender;
  pending.url = req.url();
  pending.rt_start = at;

  Duration timeout;
  Duration cost;
  {
    std::lock_guard lock(mu_);
    timeout = cfg_.fetch_timeout;
    cost = cfg_.virtual_fetch_latency;
  }
  if (log_) {
    log_->emit(event::kRtStart, cfg_.node_id, req.request_id, at,
               {{"url", pending.url}, {"sender", to_uint(req.sender)}});
  }

  auto result = std::make_shared<std::optional<net::FetchResult>>();
  auto failure = std::make_shared<int>(0);
  auto work = [this, url = pending.url, timeout, result, failure] {
    if (!net::parse_url(url)) {
      *failure = kStatusBadUrl;
      return;
    }
    try {
      *result = fetcher_(url, timeout);
    } catch (const net::FetchError& e) {
      switch (e.code()) {
        case net::FetchError::Code::Timeout: *failure = kStatusTimeout; break;
        case net::FetchError::Code::ConnectionFailed: *failure = kStatusConnectFailed; break;
        case net::FetchError::Code::InvalidUrl: *failure = kStatusBadUrl; break;
      }
    } catch (const std::exception&) {
      *failure = kStatusConnectFailed;
    }
  };
  auto done = [this, pending, result, failure]() mutable {
    {
      std::lock_guard lock(mu_);
      ex_.emplace();
      ex_->outcome = std::move(pending);
    }
    on_fetched(std::move(*result), *failure);
  };
  scheduler_.run_async(std::move(work), std::move(done), cost);
}

void Coordinator::on_fetched(std::optional<net::FetchResult> result, int failure_status) {
  std::lock_guard lock(mu_);
  fetching_ = false;
  Outcome& out = ex_->outcome;
  out.rt_end = scheduler_.now();

  std::vector<Frame> frames;
  const NodeId me = cfg_.node_id;
  if (result && result->status == 200) {
    out.http_status = 200;
    Bytes content = content::simplify_content(result->body, result->content_type);
    const std::size_t limit = cfg_.content_limit();
    if (content.size() > limit) {
      content.resize(limit);
      out.truncated = true;
    }
    out.content_bytes = content.size();
    const auto set = frame::chunk_payload(content, cfg_.chunk_capacity, out.request_id);
    for (const auto& c : set.chunks) {
      const bool last = c.id + 1u == set.chunks.size();
      frames.push_back(Frame::data(me, out.requester, out.request_id, c.id, last, c.bytes));
    }
  } else {
    out.http_status = result ? result->status : failure_status;
    frames.push_back(Frame::error(me, out.requester, out.request_id, static_cast<std::uint16_t>(out.http_status)));
  }
  emit(event::kRtEnd, out.rt_end,
       {{"status", out.http_status}, {"bytes", out.content_bytes}, {"truncated", out.truncated}});
  begin_sending(std::move(frames));
}

void Coordinator::begin_sending(std::vector<Frame> frames) {
  ex_->frames = std::move(frames);
  ex_->outcome.report.chunks_total = ex_->frames.front().type == FrameType::Data ? ex_->frames.size() : 0;
  ex_->timer = scheduler_.schedule_after(cfg_.inter_chunk_delay, [this] {
    std::lock_guard lock(mu_);
    if (ex_) transmit();
  });
}

void Coordinator::transmit() {
  Exchange& ex = *ex_;
  const Frame& f = ex.frames[ex.index];
  const bool data = f.type == FrameType::Data;
  SendReport& report = ex.outcome.report;

  Time tx_end = scheduler_.now();
  try {
    const auto tx = transport_.send(frame::encode_frame(f, cfg_.max_frame_bytes));
    tx_end = tx.end;
  } catch (const link::LinkError& e) {
    // counts as a lost transmission; the ack timer below retries it
    std::cerr << "coordinator: send failed: " << e.what() << '\n';
  }

  ++ex.attempts;
  ++report.transmissions;
  if (ex.attempts == 1) {
    if (data) ++report.chunks_sent;
  } else {
    ++report.retries_used;
  }
  if (data) {
    if (!ex.outcome.lt_start) {
      ex.outcome.lt_start = tx_end;
      emit(event::kLtStart, tx_end);
    }
    if (f.last) ex.outcome.lt_end = tx_end;
  }

  ex.awaiting_ack = true;
  ex.timer = scheduler_.schedule_at(tx_end + cfg_.ack_timeout, [this] { on_ack_timeout(); });
}

void Coordinator::on_ack(const Frame& ack) {
  if (!ex_ || !ex_->awaiting_ack) return;
  Exchange& ex = *ex_;
  const Frame& f = ex.frames[ex.index];
  // anything but the ACK for the frame in flight is stale
  if (ack.sender != ex.outcome.requester || ack.request_id != f.request_id || ack.chunk_id != f.chunk_id) return;

  scheduler_.cancel(ex.timer);
  ex.timer = 0;
  ex.awaiting_ack = false;
  if (!ack.ack_ok) {
    retry();
    return;
  }
  if (f.type == FrameType::Data) ++ex.outcome.report.chunks_acked;
  ++ex.index;
  ex.attempts = 0;
  if (ex.index == ex.frames.size()) {
    finish(f.type == FrameType::Data ? Verdict::Delivered : Verdict::ErrorSent);
    return;
  }
  ex.timer = scheduler_.schedule_after(cfg_.inter_chunk_delay, [this] {
    std::lock_guard lock(mu_);
    if (ex_) transmit();
  });
}

void Coordinator::on_ack_timeout() {
  std::lock_guard lock(mu_);
  if (!ex_ || !ex_->awaiting_ack) return;
  ex_->timer = 0;
  ex_->awaiting_ack = false;
  retry();
}

void Coordinator::retry() {
  if (cfg_.max_retries >= 0 && ex_->attempts > cfg_.max_retries) {
    finish(Verdict::RetriesExhausted);
    return;
  }
  transmit();
}

void Coordinator::finish(Verdict verdict) {
  Outcome& out = ex_->outcome;
  out.verdict = verdict;
  out.report.success = verdict != Verdict::RetriesExhausted;
  if (verdict == Verdict::Delivered && out.lt_end) emit(event::kLtEnd, *out.lt_end);
  const auto& r = out.report;
  emit(event::kExchangeDone, scheduler_.now(),
       {{"verdict", std::string(to_string(verdict))},
        {"status", out.http_status},
        {"chunks", r.chunks_total},
        {"chunks_acked", r.chunks_acked},
        {"retries", r.retries_used},
        {"transmissions", r.transmissions}});
  outcomes_.push_back(out);
  if (outcome_hook_) {
    scheduler_.post([hook = outcome_hook_, out] { hook(out); });
  }
  ex_.reset();
}

}  // namespace ilora::coord
