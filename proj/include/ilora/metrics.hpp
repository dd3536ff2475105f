#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "ilora/event_log.hpp"
#include "ilora/types.hpp"

// Request Fulfill Time and throughput arithmetic over coordinator and access
// point logs.
namespace ilora::metrics {

class MetricsError : public std::runtime_error {
 public:
  enum class Code { MissingTimestamp, NegativeInterval, ZeroDuration, DegenerateInput };
  MetricsError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct RftTimestamps {
  std::optional<Time> url_start, url_end;  // access point: request sent / first response
  std::optional<Time> rt_start, rt_end;    // coordinator: request received / origin answered
  std::optional<Time> lt_start, lt_end;    // coordinator: first / last chunk transmitted
};

struct RftBreakdown {
  Duration url_total{0};
  Duration rt_total{0};
  Duration lt_total{0};
  Duration rft{0};  // always url_total + rt_total + lt_total
};

RftBreakdown compute_rft(const RftTimestamps& ts);

/// Joins the six timestamps of one request from merged logs. The latest
/// record of each kind wins.
RftTimestamps collect_timestamps(std::span<const LogRecord> records, std::uint8_t request_id);

struct ThroughputSample {
  std::size_t lambda_bytes{0};
  Duration rft{0};
  double theta_bps{0.0};  // bytes per second
};

/// Delivered bytes over fulfil time, in bytes per second.
double throughput(std::size_t lambda_bytes, Duration rft);
double throughput(std::size_t lambda_bytes, double rft_seconds);
ThroughputSample make_sample(std::size_t lambda_bytes, Duration rft);

struct AffineFit {
  double slope{0.0};
  double intercept{0.0};
  double r_squared{0.0};
  double predict(double x) const { return slope * x + intercept; }
};

/// Ordinary least squares y = slope*x + intercept. Needs two distinct x.
AffineFit fit_affine(std::span<const std::pair<double, double>> points);

}  // namespace ilora::metrics
