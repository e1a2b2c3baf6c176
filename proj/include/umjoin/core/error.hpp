#pragma once

#include <stdexcept>
#include <string>

namespace umjoin {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or device failure in the state backend.
class StorageError : public Error {
 public:
  using Error::Error;
};

// A block or file failed its integrity check.
class CorruptionError : public StorageError {
 public:
  CorruptionError(std::string file, const std::string& what)
      : StorageError("corruption in " + file + ": " + what), file_(std::move(file)) {}
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

// Invalid configuration, plan/mode mismatch, bad CLI input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed plan text or a plan violating structural rules.
class PlanError : public Error {
 public:
  PlanError(std::string node_id, const std::string& reason)
      : Error(node_id.empty() ? reason : "node '" + node_id + "': " + reason),
        node_id_(std::move(node_id)) {}
  const std::string& node_id() const noexcept { return node_id_; }

 private:
  std::string node_id_;
};

// A tuple that cannot be processed (e.g. missing join key field).
class RejectedEventError : public Error {
 public:
  using Error::Error;
};

// Raised by the capped in-memory backend when its byte budget is exceeded.
class OutOfMemoryError : public Error {
 public:
  using Error::Error;
};

// SQL front-end failure; carries the byte offset of the offending token.
class SqlError : public Error {
 public:
  SqlError(std::size_t position, const std::string& reason)
      : Error("sql error at " + std::to_string(position) + ": " + reason), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace umjoin
