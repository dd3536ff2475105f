#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ilora/types.hpp"

namespace ilora {

namespace event {
// APN
inline constexpr const char* kUrlStart = "url_start";
inline constexpr const char* kUrlEnd = "url_end";
inline constexpr const char* kCompleted = "completed";
// coordinator
inline constexpr const char* kRtStart = "rt_start";
inline constexpr const char* kRtEnd = "rt_end";
inline constexpr const char* kLtStart = "lt_start";
inline constexpr const char* kLtEnd = "lt_end";
inline constexpr const char* kExchangeDone = "exchange_done";
}  // namespace event

/// One structured log line: an event name, who emitted it, the request it
/// belongs to and when (scheduler microseconds).
struct LogRecord {
  std::string event;
  NodeId node{};
  std::uint8_t request_id{0};
  Time t{0};
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
  static LogRecord from_json(const nlohmann::json& j);
};

/// Thread-safe sink. Keeps records in memory and optionally appends them to a
/// JSON-lines file.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::filesystem::path& file);

  void emit(LogRecord record);
  void emit(const char* event, NodeId node, std::uint8_t request_id, Time t,
            nlohmann::json detail = nlohmann::json::object());

  std::vector<LogRecord> records() const;
  std::vector<LogRecord> records_for(std::uint8_t request_id) const;
  void clear();

  static std::vector<LogRecord> read_file(const std::filesystem::path& file);

 private:
  mutable std::mutex mu_;
  std::vector<LogRecord> records_;
  std::ofstream file_;
};

}  // namespace ilora
