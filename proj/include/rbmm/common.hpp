#pragma once

#include <stdexcept>
#include <string>

namespace rbmm {

struct SrcLoc {
  int line = 0;
  int col = 0;
};

// Errors raised by the front end and the analyses. The CLI prefixes the
// file name, giving `file:line:col: message`.
class Error : public std::runtime_error {
public:
  enum class Kind { Syntax, Type, Mode, Determinism, Analysis, Usage };

  Error(Kind kind, SrcLoc loc, const std::string &msg)
      : std::runtime_error(msg), kind_(kind), loc_(loc) {}

  Kind kind() const { return kind_; }
  SrcLoc loc() const { return loc_; }
  std::string format(const std::string &file) const {
    return file + ":" + std::to_string(loc_.line) + ":" +
           std::to_string(loc_.col) + ": " + what();
  }

private:
  Kind kind_;
  SrcLoc loc_;
};

// Raised by the VM when a region safety check fails.
class SafetyViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised by the VM on arithmetic faults and malformed entry arguments.
class RuntimeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised by the VM when the step limit is exhausted.
class StepLimitExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Mode { In, Out };

enum class Determinism { Det, Semidet, Multi, Nondet, Failure };

struct DetInfo {
  bool can_fail = false;
  bool many = false;  // may produce more than one solution
  bool never_succeeds = false;

  static DetInfo of(Determinism d);
  Determinism to_det() const;
};

const char *det_name(Determinism d);

}  // namespace rbmm
