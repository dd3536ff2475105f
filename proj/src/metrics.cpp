#include "ilora/metrics.hpp"

#include <cmath>
#include <set>

namespace ilora::metrics {

namespace {

Duration interval(const std::optional<Time>& start, const std::optional<Time>& end, const char* name) {
  if (!start || !end) {
    throw MetricsError(MetricsError::Code::MissingTimestamp, std::string("missing timestamp for ") + name);
  }
  if (*end < *start) {
    throw MetricsError(MetricsError::Code::NegativeInterval, std::string(name) + " ends before it starts");
  }
  return *end - *start;
}

}  // namespace

RftBreakdown compute_rft(const RftTimestamps& ts) {
  RftBreakdown b;
  b.url_total = interval(ts.url_start, ts.url_end, "URL");
  b.rt_total = interval(ts.rt_start, ts.rt_end, "RT");
  b.lt_total = interval(ts.lt_start, ts.lt_end, "LT");
  b.rft = b.url_total + b.rt_total + b.lt_total;
  return b;
}

RftTimestamps collect_timestamps(std::span<const LogRecord> records, std::uint8_t request_id) {
  RftTimestamps ts;
  for (const auto& r : records) {
    if (r.request_id != request_id) continue;
    if (r.event == event::kUrlStart) ts.url_start = r.t;
    else if (r.event == event::kUrlEnd) ts.url_end = r.t;
    else if (r.event == event::kRtStart) ts.rt_start = r.t;
    else if (r.event == event::kRtEnd) ts.rt_end = r.t;
    else if (r.event == event::kLtStart) ts.lt_start = r.t;
    else if (r.event == event::kLtEnd) ts.lt_end = r.t;
  }
  return ts;
}

double throughput(std::size_t lambda_bytes, double rft_seconds) {
  if (!(rft_seconds > 0.0)) throw MetricsError(MetricsError::Code::ZeroDuration, "RFT must be positive");
  return static_cast<double>(lambda_bytes) / rft_seconds;
}

double throughput(std::size_t lambda_bytes, Duration rft) { return throughput(lambda_bytes, to_seconds(rft)); }

ThroughputSample make_sample(std::size_t lambda_bytes, Duration rft) {
  return ThroughputSample{lambda_bytes, rft, throughput(lambda_bytes, rft)};
}

AffineFit fit_affine(std::span<const std::pair<double, double>> points) {
  std::set<double> xs;
  for (const auto& [x, y] : points) xs.insert(x);
  if (xs.size() < 2) {
    throw MetricsError(MetricsError::Code::DegenerateInput, "need at least two distinct x values");
  }

  const double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;

  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }

  AffineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (const auto& [x, y] : points) {
    const double r = y - fit.predict(x);
    ss_res += r * r;
  }
  // constant y is fitted exactly by a flat line
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

}  // namespace ilora::metrics
