#ifndef VIRAL_RUN_LOG_HPP
#define VIRAL_RUN_LOG_HPP

#include <string>
#include <vector>

namespace viral {

enum class LogLevel { kInfo, kWarning, kError };

struct LogEntry {
  std::string stage;
  LogLevel level;
  std::string message;
};

// Collects diagnostics from every pipeline stage. Operations that can warn
// take a `RunLog*`; passing nullptr discards the messages.
class RunLog {
 public:
  void info(std::string stage, std::string message);
  void warn(std::string stage, std::string message);
  void error(std::string stage, std::string message);

  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t warning_count() const;
  bool has_warning_containing(const std::string& needle) const;

  // One JSON object per line: {"stage":..,"level":..,"message":..}
  std::string to_jsonl() const;
  void write(const std::string& path) const;

 private:
  std::vector<LogEntry> entries_;
};

inline void log_warn(RunLog* log, std::string stage, std::string message) {
  if (log != nullptr) log->warn(std::move(stage), std::move(message));
}

inline void log_info(RunLog* log, std::string stage, std::string message) {
  if (log != nullptr) log->info(std::move(stage), std::move(message));
}

const char* to_string(LogLevel level);

}  // namespace viral

#endif  // VIRAL_RUN_LOG_HPP
