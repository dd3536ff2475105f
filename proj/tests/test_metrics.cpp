#include <gtest/gtest.h>

#include <filesystem>

#include "ilora/event_log.hpp"
#include "ilora/metrics.hpp"
#include "support.hpp"

using namespace ilora;
using namespace ilora::metrics;

namespace {

RftTimestamps stamps(std::int64_t us, std::int64_t ue, std::int64_t rs, std::int64_t re, std::int64_t ls,
                     std::int64_t le) {
  return RftTimestamps{Time(us), Time(ue), Time(rs), Time(re), Time(ls), Time(le)};
}

MetricsError::Code error_of(auto&& fn) {
  try {
    fn();
  } catch (const MetricsError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no MetricsError";
  return MetricsError::Code::DegenerateInput;
}

}  // namespace

TEST(Throughput, PublishedFigures) {
  EXPECT_NEAR(throughput(930, 12.3735), 75.16, 0.01);
  EXPECT_NEAR(throughput(930, 8.811), 105.55, 0.01);
  EXPECT_NEAR(throughput(930, 7.0265), 132.36, 0.01);
  EXPECT_NEAR(throughput(2225, 21.39), 104.02, 0.01);
}

TEST(Throughput, DurationOverload) {
  const auto s = make_sample(930, Duration(7'026'500));
  EXPECT_EQ(s.lambda_bytes, 930u);
  EXPECT_NEAR(s.theta_bps, 132.3561, 1e-4);
}

TEST(Throughput, RejectsNonPositive) {
  EXPECT_EQ(error_of([] { throughput(10, 0.0); }), MetricsError::Code::ZeroDuration);
  EXPECT_EQ(error_of([] { throughput(10, -1.0); }), MetricsError::Code::ZeroDuration);
  EXPECT_EQ(error_of([] { throughput(10, Duration(0)); }), MetricsError::Code::ZeroDuration);
}

TEST(Rft, SumOfIntervals) {
  const auto b = compute_rft(stamps(0, 120, 20, 60, 100, 400));
  EXPECT_EQ(b.url_total, Duration(120));
  EXPECT_EQ(b.rt_total, Duration(40));
  EXPECT_EQ(b.lt_total, Duration(300));
  EXPECT_EQ(b.rft, Duration(460));
}

TEST(Rft, MissingAndNegative) {
  auto ts = stamps(0, 1, 2, 3, 4, 5);
  ts.lt_end.reset();
  EXPECT_EQ(error_of([&] { compute_rft(ts); }), MetricsError::Code::MissingTimestamp);
  EXPECT_EQ(error_of([] { compute_rft(stamps(10, 5, 0, 1, 0, 1)); }), MetricsError::Code::NegativeInterval);
}

TEST(RftProperty, AdditiveAndNonNegative) {
  prop::Gen gen(31);
  for (int i = 0; i < 5000; ++i) {
    std::int64_t t[6];
    for (int k = 0; k < 6; k += 2) {
      t[k] = gen.range(0, 1'000'000);
      t[k + 1] = t[k] + gen.range(0, 1'000'000);
    }
    const auto b = compute_rft(stamps(t[0], t[1], t[2], t[3], t[4], t[5]));
    ASSERT_EQ(b.rft, b.url_total + b.rt_total + b.lt_total);
    ASSERT_GE(b.rft, Duration(0));
  }
}

TEST(ThroughputProperty, MonotoneInEachArgument) {
  prop::Gen gen(8);
  for (int i = 0; i < 5000; ++i) {
    const auto lambda = static_cast<std::size_t>(gen.range(1, 100000));
    const auto rft = Duration(gen.range(1, 100'000'000));
    const auto more = Duration(rft.count() + gen.range(1, 1000));
    ASSERT_GT(throughput(lambda, rft), throughput(lambda, more));
    ASSERT_LT(throughput(lambda, rft), throughput(lambda + 1, rft));
  }
}

TEST(Collect, JoinsLogsByRequest) {
  EventLog log;
  const auto apn = node(2), coord = node(1);
  log.emit(event::kUrlStart, apn, 3, Time(0));
  log.emit(event::kRtStart, coord, 3, Time(20));
  log.emit(event::kRtStart, coord, 4, Time(999));
  log.emit(event::kRtEnd, coord, 3, Time(60));
  log.emit(event::kLtStart, coord, 3, Time(100));
  log.emit(event::kUrlEnd, apn, 3, Time(120));
  log.emit(event::kLtEnd, coord, 3, Time(400));
  const auto records = log.records();
  const auto ts = collect_timestamps(records, 3);
  EXPECT_EQ(compute_rft(ts).rft, Duration(460));
  EXPECT_FALSE(collect_timestamps(records, 4).url_start);
  EXPECT_EQ(log.records_for(3).size(), 6u);
}

TEST(EventLog, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "ilora_event_log_test.jsonl";
  std::filesystem::remove(path);
  {
    EventLog log(path);
    log.emit(event::kRtEnd, node(1), 9, Time(1234), {{"status", 200}});
    log.emit(event::kUrlEnd, node(2), 9, Time(2000));
  }
  const auto back = EventLog::read_file(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].event, event::kRtEnd);
  EXPECT_EQ(back[0].node, node(1));
  EXPECT_EQ(back[0].request_id, 9);
  EXPECT_EQ(back[0].t, Time(1234));
  EXPECT_EQ(back[0].detail.at("status"), 200);
  EXPECT_EQ(back[1].t, Time(2000));
  std::filesystem::remove(path);
}

TEST(Fit, ChunkCountAgainstRft) {
  const std::pair<double, double> pts[] = {{4, 7.0265}, {7, 12.3735}};
  const auto fit = fit_affine(pts);
  EXPECT_NEAR(fit.slope, 1.7823, 1e-4);
  EXPECT_NEAR(fit.intercept, -0.1027, 1e-3);
  EXPECT_NEAR(fit.predict(5), 8.811, 0.01);
  EXPECT_DOUBLE_EQ(fit.r_squared, 1.0);
}

TEST(Fit, ConstantYIsFlat) {
  const std::pair<double, double> pts[] = {{1, 3}, {2, 3}, {5, 3}};
  const auto fit = fit_affine(pts);
  EXPECT_DOUBLE_EQ(fit.slope, 0.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 3.0);
}

TEST(Fit, Degenerate) {
  const std::pair<double, double> one[] = {{1, 3}};
  const std::pair<double, double> same_x[] = {{2, 3}, {2, 4}};
  EXPECT_EQ(error_of([&] { fit_affine(one); }), MetricsError::Code::DegenerateInput);
  EXPECT_EQ(error_of([&] { fit_affine(same_x); }), MetricsError::Code::DegenerateInput);
  EXPECT_EQ(error_of([] { fit_affine(std::span<const std::pair<double, double>>{}); }),
            MetricsError::Code::DegenerateInput);
}

TEST(FitProperty, RecoversExactLines) {
  prop::Gen gen(77);
  for (int i = 0; i < 1000; ++i) {
    const double a = static_cast<double>(gen.range(-1000, 1000)) / 10.0;
    const double b = static_cast<double>(gen.range(-1000, 1000)) / 10.0;
    std::vector<std::pair<double, double>> pts;
    const auto n = gen.range(2, 20);
    for (int x = 0; x < n; ++x) pts.emplace_back(x, a * x + b);
    const auto fit = fit_affine(pts);
    ASSERT_NEAR(fit.slope, a, 1e-9);
    ASSERT_NEAR(fit.intercept, b, 1e-9);
  }
}
