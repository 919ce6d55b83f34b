#pragma once

#include <stdexcept>
#include <string>

namespace tetra {

// exit codes of the command line tool double as error categories
enum class ErrorKind : int {
  parameter = 2,  // assumption gate or malformed input
  numerical = 3,  // solver failure, non-contraction, divergence
  integrity = 4,  // group table or data corruption
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string &what)
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)) {}
  ErrorKind kind() const { return kind_; }
  const std::string &stage() const { return stage_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

inline Error parameter_error(const std::string &stage, const std::string &msg) {
  return Error(ErrorKind::parameter, stage, msg);
}
inline Error numerical_error(const std::string &stage, const std::string &msg) {
  return Error(ErrorKind::numerical, stage, msg);
}
inline Error integrity_fault(const std::string &stage, const std::string &msg) {
  return Error(ErrorKind::integrity, stage, msg);
}
// geometry problems (box too small, grid mismatch) are reported as parameter errors
inline Error geometry_error(const std::string &stage, const std::string &msg) {
  return Error(ErrorKind::parameter, stage, "geometry: " + msg);
}

}  // namespace tetra
