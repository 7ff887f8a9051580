#include "viral/run_log.hpp"

#include <fstream>

#include <json.hpp>

#include "viral/error.hpp"

namespace viral {

const char* to_string(LogLevel level) {
  switch (level) {
    case LogLevel::kInfo:
      return "info";
    case LogLevel::kWarning:
      return "warning";
    case LogLevel::kError:
      return "error";
  }
  return "info";
}

void RunLog::info(std::string stage, std::string message) {
  entries_.push_back({std::move(stage), LogLevel::kInfo, std::move(message)});
}

void RunLog::warn(std::string stage, std::string message) {
  entries_.push_back({std::move(stage), LogLevel::kWarning, std::move(message)});
}

void RunLog::error(std::string stage, std::string message) {
  entries_.push_back({std::move(stage), LogLevel::kError, std::move(message)});
}

std::size_t RunLog::warning_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.level == LogLevel::kWarning) ++n;
  }
  return n;
}

bool RunLog::has_warning_containing(const std::string& needle) const {
  for (const auto& e : entries_) {
    if (e.level == LogLevel::kWarning && e.message.find(needle) != std::string::npos) {
      return true;
    }
  }
  return false;
}

std::string RunLog::to_jsonl() const {
  std::string out;
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["stage"] = e.stage;
    j["level"] = to_string(e.level);
    j["message"] = e.message;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void RunLog::write(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path, "cannot write run log");
  os << to_jsonl();
  if (!os) throw IoError(path, "failed writing run log");
}

}  // namespace viral
