#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "ilora/types.hpp"

namespace ilora::net {

struct FetchResult {
  int status{0};
  std::string content_type;
  Bytes body;
};

class FetchError : public std::runtime_error {
 public:
  enum class Code { Timeout, ConnectionFailed, InvalidUrl };
  FetchError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// HTTP GET following up to `max_redirects` redirects. Throws FetchError.
FetchResult fetch_url(const std::string& url, Duration timeout, int max_redirects = 5);

using Fetcher = std::function<FetchResult(const std::string& url, Duration timeout)>;

}  // namespace ilora::net
