#pragma once

#include <stdexcept>
#include <string>

namespace wearauth {

// Base class for every error raised by this library. Subclasses carry the
// failure identity so callers can catch a specific condition instead of
// string-matching messages.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- ingest ---

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_no, const std::string& detail)
      : Error("malformed line " + std::to_string(line_no) + ": " + detail),
        line_no(line_no) {}
  std::size_t line_no;
};

class NonMonotoneTimestamp : public Error {
 public:
  explicit NonMonotoneTimestamp(std::size_t line_no)
      : Error("non-monotone timestamp at line " + std::to_string(line_no)),
        line_no(line_no) {}
  std::size_t line_no;
};

class TimestampMisaligned : public Error {
 public:
  TimestampMisaligned(std::size_t line_no, double skew_ms)
      : Error("accelerometer/gyroscope timestamps differ by " +
              std::to_string(skew_ms) + " ms at line " +
              std::to_string(line_no)),
        line_no(line_no) {}
  std::size_t line_no;
};

class EmptyFile : public Error {
 public:
  explicit EmptyFile(const std::string& path)
      : Error("no data rows in " + path) {}
};

class SampleSizeTooSmall : public Error {
 public:
  explicit SampleSizeTooSmall(std::size_t got)
      : Error("sample size must be >= 2, got " + std::to_string(got)) {}
};

// --- preprocess / features ---

class WindowTooShort : public Error {
 public:
  WindowTooShort(std::size_t len, std::size_t m)
      : Error("series of length " + std::to_string(len) +
              " too short for filter window " + std::to_string(m)) {}
};

class SeriesTooShort : public Error {
 public:
  explicit SeriesTooShort(std::size_t len)
      : Error("series of length " + std::to_string(len) + " too short") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("length mismatch: " + std::to_string(a) + " vs " +
              std::to_string(b)) {}
};

class EmptyTemplateSet : public Error {
 public:
  EmptyTemplateSet() : Error("at least one template required") {}
};

// --- decision ---

class DegenerateLabels : public Error {
 public:
  explicit DegenerateLabels(const std::string& detail)
      : Error("degenerate labels: " + detail) {}
};

// --- identify ---

class BadLayout : public Error {
 public:
  explicit BadLayout(const std::string& detail)
      : Error("bad layer layout: " + detail) {}
};

class LabelMismatch : public Error {
 public:
  explicit LabelMismatch(const std::string& detail)
      : Error("label mismatch: " + detail) {}
};

class DegenerateClasses : public Error {
 public:
  explicit DegenerateClasses(int label)
      : Error("class " + std::to_string(label) + " has zero samples") {}
};

class ShapeMismatch : public Error {
 public:
  ShapeMismatch(std::size_t got, std::size_t want)
      : Error("input length " + std::to_string(got) + ", expected " +
              std::to_string(want)) {}
};

class InsufficientSamples : public Error {
 public:
  explicit InsufficientSamples(const std::string& detail)
      : Error("insufficient samples: " + detail) {}
};

// --- synth ---

class IndexOutOfRange : public Error {
 public:
  IndexOutOfRange(std::size_t idx, std::size_t n)
      : Error("index " + std::to_string(idx) + " out of range [0," +
              std::to_string(n) + ")") {}
};

class BadDuration : public Error {
 public:
  explicit BadDuration(const std::string& detail)
      : Error("bad duration: " + detail) {}
};

// --- service ---

class AlreadyEnrolled : public Error {
 public:
  explicit AlreadyEnrolled(const std::string& user)
      : Error("user already enrolled: " + user) {}
};

class InsufficientWindows : public Error {
 public:
  explicit InsufficientWindows(std::size_t got)
      : Error("enrollment needs >= 2 windows, got " + std::to_string(got)) {}
};

class UnknownUser : public Error {
 public:
  explicit UnknownUser(const std::string& user)
      : Error("unknown user: " + user) {}
};

class NotEnrolled : public Error {
 public:
  explicit NotEnrolled(const std::string& user)
      : Error("not enrolled: " + user) {}
};

class SessionSuspended : public Error {
 public:
  explicit SessionSuspended(const std::string& user)
      : Error("session suspended for user: " + user) {}
};

class BindFailure : public Error {
 public:
  explicit BindFailure(const std::string& detail)
      : Error("cannot bind: " + detail) {}
};

class StoreError : public Error {
 public:
  explicit StoreError(const std::string& detail)
      : Error("profile store: " + detail) {}
};

}  // namespace wearauth
