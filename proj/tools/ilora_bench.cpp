// Runs the request-fulfil-time experiment over the simulated channel and
// writes one CSV row per round.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "ilora/harness.hpp"

using namespace ilora;

int main(int argc, char** argv) {
  CLI::App app{"ILoRa benchmark"};
  std::string sizes = "150,200,250";
  int rounds = 20;
  double loss = 0.0;
  std::uint64_t seed = 42;
  bool calibrate = false;
  double delay_ms = -1;
  std::string target = "/api/data";
  std::string out_path;
  int retries = 3;
  double calib_rft = 7.0265;
  std::size_t calib_size = 250;

  app.add_option("--chunk-sizes", sizes, "comma-separated chunk capacities");
  app.add_option("--rounds", rounds, "rounds per chunk size")->check(CLI::PositiveNumber);
  app.add_option("--loss", loss, "per-frame loss probability")->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", seed, "channel RNG seed");
  app.add_flag("--calibrate", calibrate, "fit the inter-chunk delay before running");
  app.add_option("--inter-chunk-delay-ms", delay_ms, "fixed inter-chunk delay instead of calibrating");
  app.add_option("--target", target, "origin path to request");
  app.add_option("--retries", retries, "coordinator retries per frame, -1 for unlimited");
  app.add_option("--calibrate-rft", calib_rft, "calibration target RFT in seconds");
  app.add_option("--calibrate-size", calib_size, "calibration chunk size");
  app.add_option("--out", out_path, "CSV output file (stdout if omitted)");
  CLI11_PARSE(app, argc, argv);

  try {
    harness::ExperimentConfig cfg;
    cfg.chunk_sizes.clear();
    for (const auto& s : cli::split(sizes, ',')) cfg.chunk_sizes.push_back(std::stoul(s));
    cfg.rounds = rounds;
    cfg.loss_probability = loss;
    cfg.rng_seed = seed;
    cfg.target_path = target;
    cfg.max_retries = retries;
    cfg.calibration.rft_s = calib_rft;
    cfg.calibration.chunk_size = calib_size;
    if (!calibrate) {
      if (delay_ms < 0) {
        std::cerr << "ilora-bench: pass --calibrate or --inter-chunk-delay-ms\n";
        return 2;
      }
      cfg.inter_chunk_delay = from_seconds(delay_ms / 1000.0);
    }

    const auto result = harness::run_experiment(cfg);
    if (out_path.empty()) {
      std::cout << result.csv();
    } else {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      out << result.csv();
    }
    std::cerr << result.summary_text();
  } catch (const std::exception& e) {
    std::cerr << "ilora-bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
