#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ilora::net {

/// Absolute http or https URL split for an HTTP client.
struct Url {
  std::string scheme;  // "http" or "https", lower case
  std::string host;    // brackets stripped for IPv6 literals
  std::uint16_t port{0};
  std::string target{"/"};  // path + query, never empty

  bool default_port() const { return port == (scheme == "https" ? 443 : 80); }
  /// scheme://host[:port]
  std::string origin() const;
  std::string str() const { return origin() + target; }
};

/// Parses an absolute http(s) URL. Rejects other schemes, empty hosts, bad
/// ports, and any whitespace or control character. Fragments are dropped.
std::optional<Url> parse_url(std::string_view text);

/// Resolves a redirect Location against the URL that produced it.
std::optional<Url> resolve_location(const Url& base, std::string_view location);

}  // namespace ilora::net
