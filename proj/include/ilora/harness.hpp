#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilora/apn.hpp"
#include "ilora/apn_http.hpp"
#include "ilora/channel.hpp"
#include "ilora/coordinator.hpp"
#include "ilora/event_log.hpp"
#include "ilora/metrics.hpp"
#include "ilora/origin.hpp"
#include "ilora/scheduler.hpp"

namespace ilora::harness {

struct TestbedConfig {
  link::ChannelConfig channel;
  coord::CoordinatorConfig coordinator;
  apn::ApnConfig apn;
  std::filesystem::path fixtures_dir{origin::OriginFixtures::default_dir()};
  std::string origin_listen{"127.0.0.1:0"};
  std::optional<std::filesystem::path> log_file;

  /// Coordinator 1 and access point 2 on a lossless virtual-clock channel,
  /// HTTP listeners on ephemeral loopback ports.
  static TestbedConfig defaults();
};

struct RoundResult {
  std::string status;  // ok, http_<code>, timeout, retries_exhausted, no_response
  std::uint8_t request_id{0};
  apn::Status apn_status{apn::Status::Idle};
  std::optional<int> http_status;
  Bytes content;
  std::optional<metrics::RftBreakdown> rft;
  double throughput_bps{0.0};
  std::size_t chunks{0};
  std::size_t retries{0};
  std::size_t transmissions{0};
  std::optional<coord::Verdict> verdict;

  bool ok() const { return status == "ok"; }
};

/// One coordinator, one access point, the mock origin and a simulated
/// channel in one process. Rounds go through the access point's HTTP
/// interface exactly as a browser would drive it.
class Testbed {
 public:
  explicit Testbed(TestbedConfig cfg = TestbedConfig::defaults());
  ~Testbed();
  Testbed(const Testbed&) = delete;
  Testbed& operator=(const Testbed&) = delete;

  /// Submits origin `path`, waits for the transfer to finish and collects
  /// metrics. Rounds are strictly sequential.
  RoundResult run_round(const std::string& path);

  void set_inter_chunk_delay(Duration d);
  void set_chunk_capacity(std::size_t capacity);
  void set_max_retries(int retries);
  void set_loss(double p);
  /// Loss switched on once the REQUEST has reached the coordinator and
  /// switched off again when the next round starts.
  void set_loss_after_request(std::optional<double> p);

  link::Scheduler& scheduler() { return *scheduler_; }
  link::SimChannel& channel() { return *channel_; }
  coord::Coordinator& coordinator() { return *coordinator_; }
  apn::AccessPoint& access_point() { return *apn_; }
  origin::MockOrigin& origin() { return *origin_; }
  EventLog& log() { return *log_; }
  int apn_http_port() const { return http_->port(); }

 private:
  TestbedConfig cfg_;
  std::unique_ptr<link::Scheduler> scheduler_;
  std::unique_ptr<link::SimChannel> channel_;
  std::shared_ptr<link::SimEndpoint> coord_ep_;
  std::shared_ptr<link::SimEndpoint> apn_ep_;
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<origin::MockOrigin> origin_;
  std::unique_ptr<coord::Coordinator> coordinator_;
  std::unique_ptr<apn::AccessPoint> apn_;
  std::unique_ptr<apn::ApnHttpServer> http_;
  std::atomic<double> loss_after_request_{-1.0};
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;  // NoConvergence
};

struct CalibrationTarget {
  std::size_t chunk_size{250};
  double rft_s{7.0265};
  std::string path{"/api/data"};
  double tolerance{0.01};  // relative
};

/// Bisects the inter-chunk delay until a lossless round of `target.path` at
/// `target.chunk_size` takes target.rft_s. Throws CalibrationError when even a
/// zero delay is too slow.
Duration calibrate_delay(const CalibrationTarget& target, TestbedConfig base = TestbedConfig::defaults());

struct ExperimentConfig {
  std::vector<std::size_t> chunk_sizes{150, 200, 250};
  int rounds{20};
  std::string target_path{"/api/data"};
  double loss_probability{0.0};
  std::uint64_t rng_seed{42};
  std::optional<Duration> inter_chunk_delay;  // unset: calibrate
  CalibrationTarget calibration;
  int max_retries{3};

  void validate() const;  // throws std::invalid_argument
};

struct ExperimentRow {
  std::size_t chunk_size{0};
  int round{0};
  std::string status;
  std::optional<metrics::RftBreakdown> rft;
  double throughput_bps{0.0};
  std::size_t chunks{0};
  std::size_t retries{0};
};

struct SizeSummary {
  std::size_t chunk_size{0};
  int rounds{0};
  int completed{0};
  double mean_rft_s{0.0};
  double mean_throughput_bps{0.0};
  double mean_retries{0.0};
};

struct ExperimentResult {
  Duration inter_chunk_delay{0};
  std::vector<ExperimentRow> rows;
  std::vector<SizeSummary> summaries;

  /// chunk_size,round,rft_s,url_total_s,rt_total_s,lt_total_s,throughput_bps,chunks,retries,status
  std::string csv() const;
  std::string summary_text() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, TestbedConfig base = TestbedConfig::defaults());

}  // namespace ilora::harness
