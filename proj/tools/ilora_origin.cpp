// Serves the fixture pages a coordinator can be pointed at.
#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "ilora/origin.hpp"

using namespace ilora;

int main(int argc, char** argv) {
  CLI::App app{"ILoRa mock origin"};
  std::string listen = "127.0.0.1:5000";
  std::string fixtures = origin::OriginFixtures::default_dir().string();
  app.add_option("--listen", listen, "host:port");
  app.add_option("--fixtures", fixtures, "directory with api_data.json, api_data_1.json, loro.html");
  CLI11_PARSE(app, argc, argv);

  const auto signals = cli::block_termination_signals();
  try {
    origin::MockOrigin server(origin::OriginFixtures::load(fixtures));
    server.start(listen);
    std::cout << "origin at " << server.url("/") << std::endl;
    cli::wait_for_termination(signals);
  } catch (const std::exception& e) {
    std::cerr << "ilora-origin: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
