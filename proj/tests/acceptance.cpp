// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "ilora/frame.hpp"
#include "ilora/harness.hpp"
#include "ilora/lora.hpp"
#include "ilora/metrics.hpp"

using namespace ilora;
using namespace ilora::harness;
using namespace std::chrono_literals;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void throughput_arithmetic() {
  struct Case {
    std::size_t bytes;
    double rft, expect;
  };
  const Case cases[] = {{930, 12.3735, 75.16}, {930, 8.811, 105.55}, {930, 7.0265, 132.36}, {2225, 21.39, 104.02}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const double got = metrics::throughput(c.bytes, c.rft);
    ok &= std::abs(got - c.expect) <= 0.01;
    detail += fmt("%zu/%.4f=%.4f ", c.bytes, c.rft, got);
  }
  report("throughput_arithmetic", ok, detail + "(tolerance 0.01 B/s)");
}

// Independent SX127x airtime in floating point.
double datasheet_toa_ms(int pl) {
  const double sf = 7, bw = 500e3, cr = 1, preamble = 8, crc = 1, ih = 0, de = 0;
  const double tsym = std::pow(2.0, sf) / bw * 1e3;
  const double n = 8 + std::max(std::ceil((8.0 * pl - 4 * sf + 28 + 16 * crc - 20 * ih) / (4 * (sf - 2 * de))) * (cr + 4), 0.0);
  return (preamble + 4.25) * tsym + n * tsym;
}

void time_on_air() {
  const double got = to_seconds(link::time_on_air(250, link::LoraParams{})) * 1e3;
  const double ref = datasheet_toa_ms(250);
  report("time_on_air_250B", std::abs(got - ref) <= 1.0 && std::abs(got - 97.344) <= 1.0,
         fmt("ToA=%.3f ms, reference=%.3f ms (tolerance 1 ms)", got, ref));
}

void chunk_oracle() {
  std::mt19937_64 rng(20240611);
  std::size_t identity = 0, too_large = 0, bad = 0;
  const int bodies = 10000;
  for (int i = 0; i < bodies; ++i) {
    Bytes body(rng() % 3001);
    for (auto& b : body) b = static_cast<std::uint8_t>(rng());
    for (std::size_t cap : {1u, 150u, 200u, 250u}) {
      const std::size_t expect = std::max<std::size_t>(1, (body.size() + cap - 1) / cap);
      try {
        const auto set = frame::chunk_payload(body, cap);
        if (set.total() != expect || frame::reassemble(set) != body || expect > frame::kMaxChunks) ++bad;
        else ++identity;
      } catch (const frame::FrameError& e) {
        // chunk ids are one byte: beyond 256 chunks the contract is TooLarge
        if (e.code() == frame::FrameErrc::TooLarge && expect > frame::kMaxChunks) ++too_large;
        else ++bad;
      }
    }
  }
  report("chunk_reassembly_oracle", bad == 0 && identity + too_large == 4u * bodies,
         fmt("%d bodies x caps {1,150,200,250}: %zu identity checks, %zu TooLarge beyond 256 chunks, %zu violations",
             bodies, identity, too_large, bad));
}

void calibrated_runs() {
  ExperimentConfig cfg;
  cfg.rounds = 3;
  ExperimentResult res;
  try {
    res = run_experiment(cfg);
  } catch (const std::exception& e) {
    report("rft_calibration", false, e.what());
    return;
  }
  const double delay_s = to_seconds(res.inter_chunk_delay);
  auto summary = [&](std::size_t size) -> const SizeSummary& {
    for (const auto& s : res.summaries)
      if (s.chunk_size == size) return s;
    throw std::logic_error("missing size");
  };
  const auto& s150 = summary(150);
  const auto& s200 = summary(200);
  const auto& s250 = summary(250);
  const bool all_done = s150.completed == 3 && s200.completed == 3 && s250.completed == 3;
  report("rft_calibration", all_done && std::abs(s250.mean_rft_s - 7.0265) <= 7.0265 * 0.01,
         fmt("inter_chunk_delay=%.6f s, 250 B mean RFT=%.4f s (target 7.0265 +-1%%)", delay_s, s250.mean_rft_s));
  const double e150 = (s150.mean_rft_s - 12.3735) / 12.3735;
  const double e200 = (s200.mean_rft_s - 8.811) / 8.811;
  report("rft_cross_size_prediction", all_done && std::abs(e150) <= 0.05 && std::abs(e200) <= 0.05,
         fmt("150 B: %.4f s vs 12.3735 (%+.2f%%), 200 B: %.4f s vs 8.811 (%+.2f%%), tolerance 5%%", s150.mean_rft_s,
             100 * e150, s200.mean_rft_s, 100 * e200));

  const std::pair<double, double> pts[] = {
      {7, s150.mean_rft_s}, {5, s200.mean_rft_s}, {4, s250.mean_rft_s}};
  const auto fit = metrics::fit_affine(pts);
  report("rft_linearity", fit.r_squared > 0.999,
         fmt("RFT = %.4f * chunks %+.4f s, R^2=%.6f (threshold 0.999)", fit.slope, fit.intercept, fit.r_squared));

  Testbed bed;
  bed.set_inter_chunk_delay(res.inter_chunk_delay);
  bed.set_chunk_capacity(250);
  const auto r = bed.run_round("/api/data/1");
  const double rft = r.rft ? to_seconds(r.rft->rft) : -1;
  report("single_chunk_rft", r.ok() && r.chunks == 1 && std::abs(rft - 1.6) <= 1.6 * 0.15,
         fmt("67 B, %zu chunk: RFT=%.4f s vs 1.6 (%+.2f%%), tolerance 15%%", r.chunks, rft, 100 * (rft - 1.6) / 1.6));

  ExperimentConfig det;
  det.rounds = 3;
  det.loss_probability = 0.1;
  det.max_retries = -1;
  det.rng_seed = 42;
  det.inter_chunk_delay = res.inter_chunk_delay;
  const auto a = run_experiment(det).csv();
  const auto b = run_experiment(det).csv();
  report("deterministic_csv", a == b && a.size() > 100,
         fmt("two runs, seed 42, loss 0.1: %zu bytes each, identical=%s", a.size(), a == b ? "yes" : "no"));
}

void byte_fidelity_and_errors() {
  Testbed bed;
  const auto& fx = bed.origin().fixtures();
  const std::pair<const char*, const std::string*> targets[] = {
      {"/api/data", &fx.api_data}, {"/api/data/1", &fx.api_data_1}, {"/loro", &fx.loro_page}};
  int good = 0, total = 0;
  std::string misses;
  for (std::size_t cap : {150u, 200u, 250u}) {
    bed.set_chunk_capacity(cap);
    for (const auto& [path, body] : targets) {
      ++total;
      const auto r = bed.run_round(path);
      if (r.ok() && to_string(r.content) == *body) ++good;
      else misses += fmt(" %s@%zu(%s)", path, cap, r.status.c_str());
    }
  }
  report("byte_fidelity", good == total, fmt("%d/%d transfers identical to origin body%s", good, total, misses.c_str()));

  bool ok = true;
  std::string detail;
  for (int code : {404, 500, 503}) {
    const auto r = bed.run_round("/error/" + std::to_string(code));
    const bool hit = r.http_status == code && r.content.empty() && r.apn_status == apn::Status::Error;
    ok &= hit;
    detail += fmt("%d->%d/%zuB ", code, r.http_status.value_or(-1), r.content.size());
  }
  report("error_propagation", ok, detail + "(APN http_status and empty content)");
}

void reliability() {
  // closed form, tests/oracles/retry_oracle.py: 4 chunks, q = 0.8^2
  const double q = 0.8 * 0.8;
  const double mean_expect = 4 / q;
  const double var = 4 * (1 - q) / (q * q);
  const int runs = 500;
  const double band = 3 * std::sqrt(var / runs);

  auto cfg = TestbedConfig::defaults();
  cfg.channel.rng_seed = 7;
  Testbed bed(cfg);
  bed.set_chunk_capacity(250);
  bed.set_max_retries(-1);
  bed.set_loss_after_request(0.2);
  int complete = 0;
  double sum = 0;
  for (int i = 0; i < runs; ++i) {
    const auto r = bed.run_round("/api/data");
    if (r.ok() && to_string(r.content) == bed.origin().fixtures().api_data) ++complete;
    sum += static_cast<double>(r.transmissions);
  }
  const double mean = sum / runs;
  report("reliability_unlimited_retries", complete == runs && std::abs(mean - mean_expect) <= band,
         fmt("loss 0.2: %d/%d complete, mean DATA transmissions %.4f vs %.4f +- %.4f (3 sigma)", complete, runs, mean,
             mean_expect, band));

  bed.set_max_retries(3);
  bed.set_loss_after_request(0.9);
  int exhausted = 0;
  std::size_t worst = 0;
  bool bounded = true;
  const int lossy_runs = 100;
  for (int i = 0; i < lossy_runs; ++i) {
    const auto r = bed.run_round("/api/data");
    if (r.verdict == coord::Verdict::RetriesExhausted) ++exhausted;
    bounded &= r.transmissions <= 4 * 4;
    worst = std::max(worst, r.transmissions);
  }
  report("reliability_retries_exhausted", exhausted == lossy_runs && bounded,
         fmt("loss 0.9, max_retries 3: %d/%d RetriesExhausted, max transmissions %zu (bound 16)", exhausted,
             lossy_runs, worst));
}

}  // namespace

int main() {
  throughput_arithmetic();
  time_on_air();
  chunk_oracle();
  calibrated_runs();
  byte_fidelity_and_errors();
  reliability();
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
