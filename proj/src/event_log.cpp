#include "ilora/event_log.hpp"

#include <stdexcept>

namespace ilora {

nlohmann::json LogRecord::to_json() const {
  return nlohmann::json{{"event", event},
                        {"node", to_uint(node)},
                        {"request_id", request_id},
                        {"t_us", t.count()},
                        {"detail", detail}};
}

LogRecord LogRecord::from_json(const nlohmann::json& j) {
  LogRecord r;
  r.event = j.at("event").get<std::string>();
  r.node = ilora::node(j.at("node").get<unsigned>());
  r.request_id = j.at("request_id").get<std::uint8_t>();
  r.t = Time(j.at("t_us").get<std::int64_t>());
  if (j.contains("detail")) r.detail = j.at("detail");
  return r;
}

EventLog::EventLog(const std::filesystem::path& file) : file_(file, std::ios::app) {
  if (!file_) throw std::runtime_error("cannot open log file " + file.string());
}

void EventLog::emit(LogRecord record) {
  std::lock_guard lock(mu_);
  if (file_.is_open()) file_ << record.to_json().dump() << '\n' << std::flush;
  records_.push_back(std::move(record));
}

void EventLog::emit(const char* event, NodeId node, std::uint8_t request_id, Time t, nlohmann::json detail) {
  emit(LogRecord{event, node, request_id, t, std::move(detail)});
}

std::vector<LogRecord> EventLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<LogRecord> EventLog::records_for(std::uint8_t request_id) const {
  std::lock_guard lock(mu_);
  std::vector<LogRecord> out;
  for (const auto& r : records_) {
    if (r.request_id == request_id) out.push_back(r);
  }
  return out;
}

void EventLog::clear() {
  std::lock_guard lock(mu_);
  records_.clear();
}

std::vector<LogRecord> EventLog::read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read log file " + file.string());
  std::vector<LogRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(LogRecord::from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace ilora
