#ifndef VIRAL_ERROR_HPP
#define VIRAL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace viral {

// Process exit codes used by the CLI.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kIo = 3,
};

// Bad input content: malformed records, violated preconditions on data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(what + ": " + path), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Invalid configuration or arguments.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace viral

#endif  // VIRAL_ERROR_HPP
