#pragma once

#include <stdexcept>
#include <string>

namespace tilr {

/// Broad failure classes. The command-line tool maps each to its own exit code.
enum class ErrorCategory {
  kSyntax = 3,      // malformed formula text
  kValidation = 4,  // input violates a documented precondition
  kIo = 5,          // missing or unreadable file
  kFormat = 6,      // file exists but its contents are malformed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error(ErrorCategory::kSyntax,
              "syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCategory::kValidation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::kFormat, what) {}
};

}  // namespace tilr
