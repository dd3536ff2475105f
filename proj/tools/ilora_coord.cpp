// Coordinator node: receives URL requests over the link, fetches them and
// sends the content back in acknowledged chunks.
#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "ilora/coordinator.hpp"
#include "ilora/harness.hpp"
#include "ilora/udp.hpp"

using namespace ilora;

int main(int argc, char** argv) {
  CLI::App app{"ILoRa coordinator"};
  unsigned node_id = 1;
  std::string peers = "2";
  std::size_t chunk_size = 250;
  int retries = 3;
  long ack_timeout_ms = 2000;
  long delay_ms = 0;
  long fetch_timeout_ms = 10000;
  std::string mode = "udp";
  std::string listen = "0.0.0.0:7001";
  std::string log_path;
  std::vector<std::string> peer_addrs;
  std::string http = "127.0.0.1:8080";

  app.add_option("--node-id", node_id, "this node's id")->check(CLI::Range(0, 255));
  app.add_option("--peers", peers, "comma-separated access point ids allowed to send requests");
  app.add_option("--chunk-size", chunk_size, "payload bytes per DATA frame")->check(CLI::Range(1, 250));
  app.add_option("--retries", retries, "retransmissions per frame, -1 for unlimited");
  app.add_option("--ack-timeout-ms", ack_timeout_ms, "wait for an ACK before retransmitting");
  app.add_option("--inter-chunk-delay-ms", delay_ms, "pause before each new DATA frame");
  app.add_option("--fetch-timeout-ms", fetch_timeout_ms, "origin fetch timeout");
  app.add_option("--mode", mode, "link: udp tunnel, or sim (whole network in this process)")
      ->check(CLI::IsMember({"sim", "udp"}));
  app.add_option("--listen", listen, "udp: local host:port");
  app.add_option("--peer-addr", peer_addrs, "udp: ID=host:port of an access point");
  app.add_option("--http", http, "sim: access point HTTP listener");
  app.add_option("--log", log_path, "append structured events (JSON lines) here");
  CLI11_PARSE(app, argc, argv);

  const auto signals = cli::block_termination_signals();
  try {
    coord::CoordinatorConfig cfg;
    cfg.node_id = node(node_id);
    for (const auto& p : cli::split(peers, ',')) cfg.expected_senders.insert(cli::parse_node(p));
    cfg.chunk_capacity = chunk_size;
    cfg.max_retries = retries;
    cfg.ack_timeout = std::chrono::milliseconds(ack_timeout_ms);
    cfg.inter_chunk_delay = std::chrono::milliseconds(delay_ms);
    cfg.fetch_timeout = std::chrono::milliseconds(fetch_timeout_ms);
    cfg.validate();

    if (mode == "sim") {
      auto bed_cfg = harness::TestbedConfig::defaults();
      bed_cfg.channel.clock_mode = link::ClockMode::Real;
      bed_cfg.coordinator = cfg;
      bed_cfg.apn.node_id = *cfg.expected_senders.begin();
      bed_cfg.apn.coordinator_id = cfg.node_id;
      bed_cfg.apn.http_listen = http;
      if (!log_path.empty()) bed_cfg.log_file = log_path;
      harness::Testbed bed(bed_cfg);
      std::cout << "coordinator " << node_id << " on simulated channel; access point UI at http://"
                << http.substr(0, http.rfind(':')) << ':' << bed.apn_http_port() << "/ ; mock origin at "
                << bed.origin().url("/") << std::endl;
      cli::wait_for_termination(signals);
      return 0;
    }

    link::Scheduler scheduler(link::ClockMode::Real);
    link::UdpTransport transport(cfg.node_id, listen, cli::parse_peer_addrs(peer_addrs), scheduler);
    std::unique_ptr<EventLog> log = log_path.empty() ? std::make_unique<EventLog>() : std::make_unique<EventLog>(log_path);
    coord::Coordinator coordinator(cfg, transport, scheduler, log.get());
    coordinator.serve();
    scheduler.start();
    std::cout << "coordinator " << node_id << " listening on udp port " << transport.local_port() << std::endl;
    cli::wait_for_termination(signals);
    scheduler.stop();
  } catch (const std::exception& e) {
    std::cerr << "ilora-coord: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
