#include "ilora/harness.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace ilora::harness {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

bool in_flight(const nlohmann::json& doc) {
  const auto status = doc.value("status", "");
  return status == "PENDING" || status == "RECEIVING";
}

}  // namespace

TestbedConfig TestbedConfig::defaults() {
  TestbedConfig cfg;
  cfg.channel.clock_mode = link::ClockMode::Virtual;
  cfg.coordinator.node_id = node(1);
  cfg.coordinator.expected_senders = {node(2)};
  cfg.apn.node_id = node(2);
  cfg.apn.coordinator_id = node(1);
  cfg.apn.http_listen = "127.0.0.1:0";
  return cfg;
}

Testbed::Testbed(TestbedConfig cfg) : cfg_(std::move(cfg)) {
  scheduler_ = std::make_unique<link::Scheduler>(cfg_.channel.clock_mode);
  channel_ = std::make_unique<link::SimChannel>(cfg_.channel, *scheduler_);
  coord_ep_ = channel_->attach(cfg_.coordinator.node_id);
  apn_ep_ = channel_->attach(cfg_.apn.node_id);
  log_ = cfg_.log_file ? std::make_unique<EventLog>(*cfg_.log_file) : std::make_unique<EventLog>();

  origin_ = std::make_unique<origin::MockOrigin>(origin::OriginFixtures::load(cfg_.fixtures_dir));
  origin_->start(cfg_.origin_listen);

  coordinator_ = std::make_unique<coord::Coordinator>(cfg_.coordinator, *coord_ep_, *scheduler_, log_.get());
  coordinator_->on_request([this](const frame::Frame&) {
    const double p = loss_after_request_.load();
    if (p >= 0.0) channel_->set_loss_probability(p);
  });
  coordinator_->serve();

  apn_ = std::make_unique<apn::AccessPoint>(cfg_.apn, *apn_ep_, *scheduler_, log_.get());
  apn_->start();
  http_ = std::make_unique<apn::ApnHttpServer>(*apn_);
  http_->start(cfg_.apn.http_listen);

  scheduler_->start();
}

Testbed::~Testbed() {
  http_->stop();
  scheduler_->stop();
  origin_->stop();
}

void Testbed::set_inter_chunk_delay(Duration d) {
  scheduler_->wait_idle();
  auto c = coordinator_->config();
  c.inter_chunk_delay = d;
  coordinator_->reconfigure(c);
}

void Testbed::set_chunk_capacity(std::size_t capacity) {
  scheduler_->wait_idle();
  auto c = coordinator_->config();
  c.chunk_capacity = capacity;
  coordinator_->reconfigure(c);
}

void Testbed::set_max_retries(int retries) {
  scheduler_->wait_idle();
  auto c = coordinator_->config();
  c.max_retries = retries;
  coordinator_->reconfigure(c);
}

void Testbed::set_loss(double p) {
  cfg_.channel.loss_probability = p;
  channel_->set_loss_probability(p);
}

void Testbed::set_loss_after_request(std::optional<double> p) { loss_after_request_ = p.value_or(-1.0); }

RoundResult Testbed::run_round(const std::string& path) {
  scheduler_->wait_idle();
  channel_->set_loss_probability(cfg_.channel.loss_probability);
  log_->clear();
  const std::size_t outcomes_before = coordinator_->outcomes().size();

  RoundResult out;
  httplib::Client client("127.0.0.1", http_->port());
  client.set_read_timeout(30, 0);
  auto res = client.Post("/submit", httplib::Params{{"url", origin_->url(path)}});
  if (!res || res->status != 200) {
    out.status = "submit_" + (res ? std::to_string(res->status) : std::string("failed"));
    return out;
  }
  out.request_id = nlohmann::json::parse(res->body).at("request_id").get<std::uint8_t>();

  // Poll like the browser page does.
  const auto give_up = std::chrono::steady_clock::now() + std::chrono::minutes(5);
  nlohmann::json doc;
  for (;;) {
    auto got = client.Get("/received");
    if (got && got->status == 200) {
      doc = nlohmann::json::parse(got->body);
      const auto& rid = doc["request_id"];
      if (rid.is_number() && rid.get<int>() == out.request_id && !in_flight(doc)) break;
    }
    if (std::chrono::steady_clock::now() > give_up) {
      out.status = "stalled";
      return out;
    }
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }
  // let the final ACK land before the next round
  scheduler_->wait_idle();

  out.apn_status = apn_->state().status;
  if (!doc["http_status"].is_null()) out.http_status = doc["http_status"].get<int>();
  out.content = apn::content_from_json(doc);

  const auto outcomes = coordinator_->outcomes();
  if (outcomes.size() > outcomes_before && outcomes.back().request_id == out.request_id) {
    const auto& o = outcomes.back();
    out.verdict = o.verdict;
    out.chunks = o.report.chunks_total;
    out.retries = o.report.retries_used;
    out.transmissions = o.report.transmissions;
  }

  switch (out.apn_status) {
    case apn::Status::Complete: {
      out.status = "ok";
      try {
        const auto breakdown = metrics::compute_rft(metrics::collect_timestamps(log_->records(), out.request_id));
        out.rft = breakdown;
        if (breakdown.rft > Duration::zero()) out.throughput_bps = metrics::throughput(out.content.size(), breakdown.rft);
      } catch (const metrics::MetricsError& e) {
        out.status = std::string("metrics_") + e.what();
      }
      break;
    }
    case apn::Status::Error:
      out.status = "http_" + std::to_string(out.http_status.value_or(0));
      break;
    case apn::Status::Timeout:
      if (out.verdict == coord::Verdict::RetriesExhausted) out.status = "retries_exhausted";
      else out.status = out.verdict ? "timeout" : "no_response";
      break;
    default:
      out.status = "incomplete";
  }
  return out;
}

Duration calibrate_delay(const CalibrationTarget& target, TestbedConfig base) {
  base.channel.loss_probability = 0.0;
  base.coordinator.chunk_capacity = target.chunk_size;
  base.coordinator.inter_chunk_delay = Duration::zero();
  Testbed bed(std::move(base));

  auto measure = [&](Duration delay) {
    bed.set_inter_chunk_delay(delay);
    const auto r = bed.run_round(target.path);
    if (!r.ok() || !r.rft) throw CalibrationError("calibration round failed: " + r.status);
    return to_seconds(r.rft->rft);
  };

  const double floor_s = measure(Duration::zero());
  if (floor_s > target.rft_s * (1.0 + target.tolerance)) {
    throw CalibrationError("no convergence: zero delay already gives " + fixed(floor_s, 4) + " s, target " +
                           fixed(target.rft_s, 4) + " s");
  }
  if (floor_s >= target.rft_s) return Duration::zero();

  // RFT grows monotonically with the delay; bisect to the microsecond.
  Duration lo{0};
  Duration hi = from_seconds(target.rft_s);
  double lo_s = floor_s;
  double hi_s = measure(hi);
  while (hi - lo > Duration(1)) {
    const Duration mid = lo + (hi - lo) / 2;
    const double mid_s = measure(mid);
    if (mid_s < target.rft_s) {
      lo = mid;
      lo_s = mid_s;
    } else {
      hi = mid;
      hi_s = mid_s;
    }
  }
  const bool pick_lo = std::abs(lo_s - target.rft_s) <= std::abs(hi_s - target.rft_s);
  const double best_s = pick_lo ? lo_s : hi_s;
  if (std::abs(best_s - target.rft_s) > target.rft_s * target.tolerance) {
    throw CalibrationError("no convergence: best RFT " + fixed(best_s, 4) + " s");
  }
  return pick_lo ? lo : hi;
}

void ExperimentConfig::validate() const {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (chunk_sizes.empty()) throw std::invalid_argument("no chunk sizes");
  for (auto c : chunk_sizes) {
    if (c < 1 || c > frame::kDefaultMaxFrameBytes - frame::kHeaderBytes) {
      throw std::invalid_argument("chunk size " + std::to_string(c) + " does not fit a frame");
    }
  }
  if (!(loss_probability >= 0.0 && loss_probability <= 1.0)) throw std::invalid_argument("loss must be in [0,1]");
  if (inter_chunk_delay && *inter_chunk_delay < Duration::zero()) throw std::invalid_argument("negative delay");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, TestbedConfig base) {
  cfg.validate();
  ExperimentResult result;
  result.inter_chunk_delay = cfg.inter_chunk_delay ? *cfg.inter_chunk_delay : calibrate_delay(cfg.calibration, base);

  base.channel.rng_seed = cfg.rng_seed;
  base.channel.loss_probability = cfg.loss_probability;
  base.coordinator.inter_chunk_delay = result.inter_chunk_delay;
  base.coordinator.max_retries = cfg.max_retries;
  base.coordinator.chunk_capacity = cfg.chunk_sizes.front();
  Testbed bed(std::move(base));

  for (const auto size : cfg.chunk_sizes) {
    bed.set_chunk_capacity(size);
    SizeSummary summary;
    summary.chunk_size = size;
    for (int round = 1; round <= cfg.rounds; ++round) {
      const auto r = bed.run_round(cfg.target_path);
      ExperimentRow row;
      row.chunk_size = size;
      row.round = round;
      row.status = r.status;
      row.rft = r.rft;
      row.throughput_bps = r.throughput_bps;
      row.chunks = r.chunks;
      row.retries = r.retries;
      result.rows.push_back(row);

      ++summary.rounds;
      if (r.ok() && r.rft) {
        ++summary.completed;
        summary.mean_rft_s += to_seconds(r.rft->rft);
        summary.mean_throughput_bps += r.throughput_bps;
        summary.mean_retries += static_cast<double>(r.retries);
      }
    }
    if (summary.completed > 0) {
      summary.mean_rft_s /= summary.completed;
      summary.mean_throughput_bps /= summary.completed;
      summary.mean_retries /= summary.completed;
    }
    result.summaries.push_back(summary);
  }
  return result;
}

std::string ExperimentResult::csv() const {
  std::ostringstream out;
  out << "chunk_size,round,rft_s,url_total_s,rt_total_s,lt_total_s,throughput_bps,chunks,retries,status\n";
  for (const auto& r : rows) {
    out << r.chunk_size << ',' << r.round << ',';
    if (r.rft) {
      out << fixed(to_seconds(r.rft->rft), 6) << ',' << fixed(to_seconds(r.rft->url_total), 6) << ','
          << fixed(to_seconds(r.rft->rt_total), 6) << ',' << fixed(to_seconds(r.rft->lt_total), 6) << ','
          << fixed(r.throughput_bps, 4);
    } else {
      out << ",,,,";
    }
    out << ',' << r.chunks << ',' << r.retries << ',' << r.status << '\n';
  }
  return out.str();
}

std::string ExperimentResult::summary_text() const {
  std::ostringstream out;
  out << "inter_chunk_delay_s " << fixed(to_seconds(inter_chunk_delay), 6) << '\n';
  for (const auto& s : summaries) {
    out << "chunk_size " << s.chunk_size << ": " << s.completed << '/' << s.rounds << " completed, mean rft "
        << fixed(s.mean_rft_s, 4) << " s, mean throughput " << fixed(s.mean_throughput_bps, 2) << " B/s, mean retries "
        << fixed(s.mean_retries, 2) << '\n';
  }
  return out.str();
}

}  // namespace ilora::harness
