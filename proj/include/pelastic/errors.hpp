#pragma once

#include <stdexcept>
#include <string>

namespace pel {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Parse = 1,
  Validation = 2,
  Closure = 3,
  Horizon = 4,
  StepFailed = 5,
  Monitor = 6,
  Io = 7,
  SmallnessFailed = 8,
  Internal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(ErrorKind::Parse, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorKind::Validation, w) {}
};
struct ClosureError : Error {
  explicit ClosureError(const std::string& w) : Error(ErrorKind::Closure, w) {}
};
struct HorizonExceeded : Error {
  explicit HorizonExceeded(const std::string& w) : Error(ErrorKind::Horizon, w) {}
};
struct StepFailed : Error {
  explicit StepFailed(const std::string& w) : Error(ErrorKind::StepFailed, w) {}
};
struct MonitorViolation : Error {
  MonitorViolation(std::string monitor, long step, const std::string& w)
      : Error(ErrorKind::Monitor, w), monitor_(std::move(monitor)), step_(step) {}
  const std::string& monitor() const noexcept { return monitor_; }
  long step() const noexcept { return step_; }

 private:
  std::string monitor_;
  long step_;
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};
struct SmallnessFailed : Error {
  explicit SmallnessFailed(const std::string& w) : Error(ErrorKind::SmallnessFailed, w) {}
};
struct InternalError : Error {
  explicit InternalError(const std::string& w) : Error(ErrorKind::Internal, w) {}
};

}  // namespace pel
