#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "ilora/types.hpp"

namespace ilora::detail {
class BackgroundServer;
}

namespace ilora::origin {

inline constexpr std::size_t kApiDataBytes = 930;
inline constexpr std::size_t kApiRecordBytes = 67;
inline constexpr std::size_t kLoroPageBytes = 2225;

struct OriginFixtures {
  std::string api_data;    // /api/data, JSON
  std::string api_data_1;  // /api/data/1, JSON
  std::string loro_page;   // /loro, HTML + CSS

  /// Reads api_data.json, api_data_1.json and loro.html and checks their
  /// exact sizes. Throws std::runtime_error.
  static OriginFixtures load(const std::filesystem::path& dir);
  static std::filesystem::path default_dir();
};

/// Stand-in for the public web server behind the coordinator.
///   GET /api/data, /api/data/1, /loro    fixtures
///   GET /error/{code}                    that status, short text body
///   GET /redirect/{n}                    302 chain ending at /api/data
///   GET /slow/{ms}                       answers after a delay
///   GET /media                           HTML full of media and data: URIs
///   GET /binary                          256 bytes 0x00..0xff
class MockOrigin {
 public:
  explicit MockOrigin(OriginFixtures fixtures);
  ~MockOrigin();
  MockOrigin(const MockOrigin&) = delete;
  MockOrigin& operator=(const MockOrigin&) = delete;

  void start(const std::string& listen = "127.0.0.1:0");
  void stop();
  int port() const;
  /// http://127.0.0.1:<port><path>
  std::string url(const std::string& path) const;
  const OriginFixtures& fixtures() const { return fixtures_; }

 private:
  OriginFixtures fixtures_;
  std::unique_ptr<detail::BackgroundServer> http_;
};

/// The /media page before simplification.
extern const char* const kMediaPage;

}  // namespace ilora::origin
