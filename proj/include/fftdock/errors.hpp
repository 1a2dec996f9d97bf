#pragma once

#include <stdexcept>
#include <string>

namespace fftdock {

// Base for every error raised by the library. The CLI maps the concrete
// types below onto its exit-code table.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable input file.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed PDB text; carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NoAtomsError : public Error {
 public:
  explicit NoAtomsError(const std::string& where) : Error("no atoms: " + where) {}
};

class GridOverflowError : public Error {
 public:
  GridOverflowError(const std::string& what, int serial) : Error(what), serial_(serial) {}
  int serial() const { return serial_; }

 private:
  int serial_;
};

// Invalid numeric parameter or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Grids with different GridSpecs handed to a correlation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Run records that describe different workloads.
class ComparisonError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public Error {
 public:
  using Error::Error;
};

}  // namespace fftdock
