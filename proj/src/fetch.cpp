#include "ilora/fetch.hpp"

#include <chrono>

#include <httplib.h>

#include "ilora/url.hpp"

namespace ilora::net {

namespace {

using Clock = std::chrono::steady_clock;

void set_timeouts(httplib::Client& client, Duration left) {
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(left);
  const auto usec = left - sec;
  client.set_connection_timeout(sec.count(), usec.count());
  client.set_read_timeout(sec.count(), usec.count());
  client.set_write_timeout(sec.count(), usec.count());
}

}  // namespace

FetchResult fetch_url(const std::string& text, Duration timeout, int max_redirects) {
  auto url = parse_url(text);
  if (!url) throw FetchError(FetchError::Code::InvalidUrl, "not an absolute http(s) URL: " + text);

  const auto deadline = Clock::now() + timeout;
  for (int hop = 0;; ++hop) {
    const auto left = std::chrono::duration_cast<Duration>(deadline - Clock::now());
    if (left <= Duration::zero()) throw FetchError(FetchError::Code::Timeout, "timed out fetching " + text);

    httplib::Client client(url->origin());
    if (!client.is_valid()) {
      throw FetchError(FetchError::Code::InvalidUrl, "unsupported URL (https needs TLS support): " + url->str());
    }
    set_timeouts(client, left);
    client.set_follow_location(false);

    auto res = client.Get(url->target);
    if (!res) {
      const auto err = res.error();
      const bool late = Clock::now() >= deadline;
      if (err == httplib::Error::ConnectionTimeout ||
          ((err == httplib::Error::Read || err == httplib::Error::Write) && late)) {
        throw FetchError(FetchError::Code::Timeout, "timed out fetching " + url->str());
      }
      throw FetchError(FetchError::Code::ConnectionFailed, url->str() + ": " + httplib::to_string(err));
    }

    const int status = res->status;
    const bool redirect = status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
    if (redirect && res->has_header("Location")) {
      if (hop >= max_redirects) {
        throw FetchError(FetchError::Code::ConnectionFailed, "too many redirects fetching " + text);
      }
      auto next = resolve_location(*url, res->get_header_value("Location"));
      if (!next) throw FetchError(FetchError::Code::InvalidUrl, "bad redirect target from " + url->str());
      url = std::move(next);
      continue;
    }

    FetchResult out;
    out.status = status;
    out.content_type = res->get_header_value("Content-Type");
    out.body.assign(res->body.begin(), res->body.end());
    return out;
  }
}

}  // namespace ilora::net
