#pragma once

#include <stdexcept>
#include <string>

namespace trajkit {

enum class ErrorKind {
  invalid_input,  // precondition violated by caller-supplied values
  config,         // inconsistent model / layer / run configuration
  data,           // unusable input data (files, corpora)
  numerical,      // non-finite loss, failed gradient check
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace trajkit
