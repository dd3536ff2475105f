// Access point node: serves the request page, forwards URLs to the
// coordinator and assembles the replies.
#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "ilora/apn.hpp"
#include "ilora/apn_http.hpp"
#include "ilora/harness.hpp"
#include "ilora/udp.hpp"

using namespace ilora;

int main(int argc, char** argv) {
  CLI::App app{"ILoRa access point"};
  unsigned node_id = 2;
  unsigned coordinator = 1;
  std::string listen = "0.0.0.0:8080";
  std::string mode = "udp";
  long timeout_s = 120;
  std::string udp_listen = "0.0.0.0:7002";
  std::vector<std::string> peer_addrs;
  long delay_ms = 0;
  std::string log_path;

  app.add_option("--node-id", node_id, "this node's id")->check(CLI::Range(0, 255));
  app.add_option("--coordinator", coordinator, "coordinator node id")->check(CLI::Range(0, 255));
  app.add_option("--listen", listen, "HTTP listener host:port");
  app.add_option("--mode", mode, "link: udp tunnel, or sim (whole network in this process)")
      ->check(CLI::IsMember({"sim", "udp"}));
  app.add_option("--timeout-s", timeout_s, "give up on a request after this many seconds");
  app.add_option("--udp-listen", udp_listen, "udp: local host:port");
  app.add_option("--peer-addr", peer_addrs, "udp: ID=host:port of the coordinator");
  app.add_option("--inter-chunk-delay-ms", delay_ms, "sim: coordinator pause before each DATA frame");
  app.add_option("--log", log_path, "append structured events (JSON lines) here");
  CLI11_PARSE(app, argc, argv);

  const auto signals = cli::block_termination_signals();
  try {
    apn::ApnConfig cfg;
    cfg.node_id = node(node_id);
    cfg.coordinator_id = node(coordinator);
    cfg.http_listen = listen;
    cfg.request_timeout = std::chrono::seconds(timeout_s);
    cfg.validate();

    if (mode == "sim") {
      auto bed_cfg = harness::TestbedConfig::defaults();
      bed_cfg.channel.clock_mode = link::ClockMode::Real;
      bed_cfg.apn = cfg;
      bed_cfg.coordinator.node_id = cfg.coordinator_id;
      bed_cfg.coordinator.expected_senders = {cfg.node_id};
      bed_cfg.coordinator.inter_chunk_delay = std::chrono::milliseconds(delay_ms);
      if (!log_path.empty()) bed_cfg.log_file = log_path;
      harness::Testbed bed(bed_cfg);
      std::cout << "access point " << node_id << " UI on port " << bed.apn_http_port()
                << " (simulated channel); mock origin at " << bed.origin().url("/") << std::endl;
      cli::wait_for_termination(signals);
      return 0;
    }

    link::Scheduler scheduler(link::ClockMode::Real);
    link::UdpTransport transport(cfg.node_id, udp_listen, cli::parse_peer_addrs(peer_addrs), scheduler);
    std::unique_ptr<EventLog> log = log_path.empty() ? std::make_unique<EventLog>() : std::make_unique<EventLog>(log_path);
    apn::AccessPoint ap(cfg, transport, scheduler, log.get());
    ap.start();
    apn::ApnHttpServer http(ap);
    http.start(listen);
    scheduler.start();
    std::cout << "access point " << node_id << " UI on port " << http.port() << ", udp port "
              << transport.local_port() << std::endl;
    cli::wait_for_termination(signals);
    http.stop();
    scheduler.stop();
  } catch (const std::exception& e) {
    std::cerr << "ilora-apn: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
