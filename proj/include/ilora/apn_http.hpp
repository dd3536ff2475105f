#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "ilora/apn.hpp"

namespace ilora::detail {
class BackgroundServer;
}

namespace ilora::apn {

/// /received document: {request_id, status, chunks_received, complete,
/// http_status, content, content_encoding}. Content is sent as text when it
/// is valid UTF-8 and base64 otherwise.
nlohmann::json to_json(const ReceivedView& view);

/// Decodes the content field of a /received document.
Bytes content_from_json(const nlohmann::json& doc);

/// The browser-facing side of an access point:
///   GET  /          entry page
///   POST /submit    form field `url` -> {"request_id": n} or 400/409/414
///   GET  /received  progress document
class ApnHttpServer {
 public:
  explicit ApnHttpServer(AccessPoint& apn);
  ~ApnHttpServer();
  ApnHttpServer(const ApnHttpServer&) = delete;
  ApnHttpServer& operator=(const ApnHttpServer&) = delete;

  /// Binds "host:port" (port 0 picks one) and serves on a background thread.
  /// Throws on bind failure.
  void start(const std::string& listen);
  void stop();
  int port() const;

 private:
  AccessPoint& apn_;
  std::unique_ptr<detail::BackgroundServer> http_;
};

/// Embedded UI page served at GET /.
extern const char* const kIndexPage;

}  // namespace ilora::apn
