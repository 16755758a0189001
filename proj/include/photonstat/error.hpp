#pragma once

#include <stdexcept>
#include <string>

namespace photonstat {

/// Base of every exception thrown by the library. The category decides the
/// CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { invalid_input, numerical, io };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(Category::invalid_input, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Category::numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Category::io, what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace photonstat
