// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_ERRORS_HPP
#define FINGERMATCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fingermatch {

// Every domain failure carries a machine-parseable class string; the CLI
// prints "<class>: <message>" and exits 1.
class Error : public std::runtime_error {
 public:
  Error(std::string error_class, const std::string& msg)
      : std::runtime_error(msg), class_(std::move(error_class)) {}
  const std::string& error_class() const { return class_; }

 private:
  std::string class_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config-error", m) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& m) : Error("dimension-error", m) {}
};
struct LoadError : Error {
  explicit LoadError(const std::string& m) : Error("load-error", m) {}
};
struct ProtocolError : Error {
  explicit ProtocolError(const std::string& m) : Error("protocol-error", m) {}
};
struct MetricError : Error {
  explicit MetricError(const std::string& m) : Error("metric-error", m) {}
};
struct NormalizationError : Error {
  explicit NormalizationError(const std::string& m)
      : Error("normalization-error", m) {}
};
struct AlignmentError : Error {
  explicit AlignmentError(const std::string& m) : Error("alignment-error", m) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error("numerical-error", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io-error", m) {}
};
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& m)
      : Error("degenerate-input", m) {}
};

}  // namespace fingermatch

#endif  // FINGERMATCH_ERRORS_HPP
