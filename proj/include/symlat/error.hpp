#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symlat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two group elements of different kinds (or from different tables) were combined.
class IncompatibleElements : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A finite-only operation was called on a continuous group.
class NotFinite : public Error {
 public:
  using Error::Error;
};

class NotASupergroup : public Error {
 public:
  using Error::Error;
};

class DuplicateNode : public Error {
 public:
  using Error::Error;
};

/// The node set does not form a lattice (order, meets or joins fail).
class InvalidLattice : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The order bound evaluated to zero on every redraw of a pair.
class DegenerateMetric : public Error {
 public:
  using Error::Error;
};

/// A node's invariance test failed during a lattice search.
class NodeTestError : public Error {
 public:
  NodeTestError(std::size_t node, const std::string& label, const std::string& what)
      : Error("node " + std::to_string(node) + " (" + label + "): " + what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Malformed text in one of the plain-text formats; carries a 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Experiment configuration rejected; carries a 1-based line (0 when not tied to a line).
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : Error(line ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Dataset ingestion failed at a byte offset into the offending file.
class DataError : public Error {
 public:
  DataError(std::size_t offset, const std::string& what)
      : Error("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace symlat
