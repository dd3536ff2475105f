#include "ilora/apn_http.hpp"

#include "background_server.hpp"

namespace ilora::apn {

namespace {

Bytes base64_decode(const std::string& in) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  Bytes out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    const int v = value(c);
    if (v < 0) continue;  // padding
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

nlohmann::json error_body(const std::string& message) { return nlohmann::json{{"error", message}}; }

}  // namespace

nlohmann::json to_json(const ReceivedView& view) {
  nlohmann::json j;
  j["request_id"] = view.request_id ? nlohmann::json(*view.request_id) : nlohmann::json();
  j["status"] = std::string(to_string(view.status));
  j["chunks_received"] = view.chunks_received;
  j["complete"] = view.complete;
  j["http_status"] = view.http_status ? nlohmann::json(*view.http_status) : nlohmann::json();
  const std::string text = ilora::to_string(view.content);
  if (frame::is_valid_utf8(view.content)) {
    j["content"] = text;
    j["content_encoding"] = "utf-8";
  } else {
    j["content"] = httplib::detail::base64_encode(text);
    j["content_encoding"] = "base64";
  }
  return j;
}

Bytes content_from_json(const nlohmann::json& doc) {
  const auto content = doc.at("content").get<std::string>();
  if (doc.value("content_encoding", "utf-8") == "base64") return base64_decode(content);
  return to_bytes(content);
}

ApnHttpServer::ApnHttpServer(AccessPoint& apn) : apn_(apn), http_(std::make_unique<detail::BackgroundServer>()) {
  auto& srv = http_->server();

  srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kIndexPage, "text/html; charset=utf-8"); });

  srv.Post("/submit", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("url")) {
      res.status = 400;
      res.set_content(error_body("missing form field 'url'").dump(), "application/json");
      return;
    }
    try {
      const auto rid = apn_.submit_url(req.get_param_value("url"));
      res.set_content(nlohmann::json{{"request_id", rid}}.dump(), "application/json");
    } catch (const ApnError& e) {
      res.status = e.http_status();
      res.set_content(error_body(e.what()).dump(), "application/json");
    }
  });

  srv.Get("/received", [this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Cache-Control", "no-store");
    res.set_content(to_json(apn_.received_view()).dump(), "application/json");
  });
}

ApnHttpServer::~ApnHttpServer() { stop(); }

void ApnHttpServer::start(const std::string& listen) { http_->start(listen); }

void ApnHttpServer::stop() { http_->stop(); }

int ApnHttpServer::port() const { return http_->port(); }

const char* const kIndexPage = R"html(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>ILoRa access point</title>
<style>
body { font-family: sans-serif; max-width: 46em; margin: 2em auto; padding: 0 1em; }
input[type=url] { width: 70%; }
#state { margin: 1em 0; color: #444; }
#out { border: 1px solid #ccc; min-height: 8em; white-space: pre-wrap; padding: .5em; }
iframe { width: 100%; min-height: 20em; border: 1px solid #ccc; }
</style>
</head>
<body>
<h1>Request a page</h1>
<form id="f">
<input type="url" id="url" placeholder="http://example.org/api/data" required>
<button type="submit">Fetch</button>
</form>
<div id="state">idle</div>
<div id="out"></div>
<script>
const stateEl = document.getElementById('state');
const outEl = document.getElementById('out');
let timer = null;

function render(doc) {
  if (doc.request_id === null) { stateEl.textContent = 'idle'; return; }
  if (doc.status === 'ERROR') {
    stateEl.textContent = 'origin returned ' + doc.http_status;
    outEl.textContent = '';
    return;
  }
  stateEl.textContent = doc.status.toLowerCase() + ', ' + doc.chunks_received + ' chunk(s)';
  if (doc.content_encoding === 'base64') { outEl.textContent = '[binary, ' + doc.content.length + ' base64 chars]'; return; }
  if (doc.complete && /^\s*</.test(doc.content)) {
    outEl.textContent = '';
    const frame = document.createElement('iframe');
    frame.setAttribute('sandbox', '');
    frame.srcdoc = doc.content;
    outEl.appendChild(frame);
  } else {
    outEl.textContent = doc.content;
  }
}

async function poll() {
  try {
    const doc = await (await fetch('/received')).json();
    render(doc);
    if (doc.status !== 'PENDING' && doc.status !== 'RECEIVING') { clearInterval(timer); timer = null; }
  } catch (e) { stateEl.textContent = 'connection problem, retrying'; }
}

document.getElementById('f').addEventListener('submit', async (ev) => {
  ev.preventDefault();
  const url = document.getElementById('url').value.trim();
  if (!url) return;
  const res = await fetch('/submit', { method: 'POST', body: new URLSearchParams({ url }) });
  if (res.status === 409) { stateEl.textContent = 'transfer in progress'; return; }
  if (res.status === 414) { stateEl.textContent = 'URL too long'; return; }
  if (!res.ok) { stateEl.textContent = 'invalid URL'; return; }
  outEl.textContent = '';
  if (!timer) timer = setInterval(poll, 500);
  poll();
});
poll();
</script>
</body>
</html>
)html";

}  // namespace ilora::apn
