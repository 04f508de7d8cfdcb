#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace selcal {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input. `line` is 1-based (0 when the input is not line oriented);
// `byte_offset` is the parser position inside the line or document.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t byte_offset)
      : Error(what), line_(line), byte_offset_(byte_offset) {}

  std::size_t line() const { return line_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t line_;
  std::size_t byte_offset_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class JoinError : public Error {
 public:
  using Error::Error;
};

class DuplicateKeyError : public Error {
 public:
  explicit DuplicateKeyError(const std::string& key)
      : Error("duplicate question_id: " + key), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class AdapterError : public Error {
 public:
  using Error::Error;
};

}  // namespace selcal
