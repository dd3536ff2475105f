#include "ilora/origin.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "background_server.hpp"

namespace ilora::origin {

namespace {

std::string read_file(const std::filesystem::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read fixture " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string body = ss.str();
  if (body.size() != expected) {
    throw std::runtime_error(path.string() + " is " + std::to_string(body.size()) + " bytes, expected " +
                             std::to_string(expected));
  }
  return body;
}

}  // namespace

OriginFixtures OriginFixtures::load(const std::filesystem::path& dir) {
  OriginFixtures f;
  f.api_data = read_file(dir / "api_data.json", kApiDataBytes);
  f.api_data_1 = read_file(dir / "api_data_1.json", kApiRecordBytes);
  f.loro_page = read_file(dir / "loro.html", kLoroPageBytes);
  return f;
}

std::filesystem::path OriginFixtures::default_dir() {
  if (const char* env = std::getenv("ILORA_FIXTURE_DIR")) return env;
  return ILORA_FIXTURE_DIR;
}

MockOrigin::MockOrigin(OriginFixtures fixtures)
    : fixtures_(std::move(fixtures)), http_(std::make_unique<detail::BackgroundServer>()) {
  auto& srv = http_->server();
  auto serve = [&srv](const char* path, const std::string& body, const char* type) {
    srv.Get(path, [&body, type](const httplib::Request&, httplib::Response& res) { res.set_content(body, type); });
  };
  serve("/api/data", fixtures_.api_data, "application/json");
  serve("/api/data/1", fixtures_.api_data_1, "application/json");
  serve("/loro", fixtures_.loro_page, "text/html; charset=utf-8");

  srv.Get(R"(/error/(\d{3}))", [](const httplib::Request& req, httplib::Response& res) {
    const int code = std::stoi(req.matches[1]);
    res.status = code >= 200 && code <= 599 ? code : 400;
    res.set_content(httplib::status_message(res.status), "text/plain");
  });
  srv.Get(R"(/redirect/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
    const int n = std::stoi(req.matches[1]);
    res.set_redirect(n <= 1 ? std::string("/api/data") : "/redirect/" + std::to_string(n - 1));
  });
  srv.Get(R"(/slow/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(std::stoi(req.matches[1])));
    res.set_content("slow", "text/plain");
  });
  srv.Get("/media", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(kMediaPage, "text/html; charset=utf-8");
  });
  srv.Get("/binary", [](const httplib::Request&, httplib::Response& res) {
    std::string bytes(256, '\0');
    for (int i = 0; i < 256; ++i) bytes[i] = static_cast<char>(i);
    res.set_content(bytes, "application/octet-stream");
  });
}

MockOrigin::~MockOrigin() { stop(); }

void MockOrigin::start(const std::string& listen) { http_->start(listen); }

void MockOrigin::stop() { http_->stop(); }

int MockOrigin::port() const { return http_->port(); }

std::string MockOrigin::url(const std::string& path) const {
  return "http://127.0.0.1:" + std::to_string(port()) + path;
}

const char* const kMediaPage = R"html(<!DOCTYPE html>
<html>
<head>
<title>Field report</title>
<style>.hero { background: url("data:image/png;base64,iVBORw0KGgo=") no-repeat; } p { margin: 0 }</style>
<script>window.track && track('view');</script>
</head>
<body>
<h1 class="hero">Field report</h1>
<img src="/photos/plot-7.jpg" alt="plot 7">
<p>Germination at plot 7 is <a href="/plots/7">on schedule</a>.</p>
<video controls><source src="/clips/plot-7.mp4" type="video/mp4">No video support.</video>
<p style="background-image:url(data:image/gif;base64,R0lGOD)">Rain gauge read 12 mm.</p>
<iframe src="https://maps.example/embed?q=plot7"></iframe>
<a href="data:text/plain,hello" title="raw">raw note</a>
</body>
</html>
)html";

}  // namespace ilora::origin
