// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rflow {

// Base class for all library errors. The CLI maps subtypes to exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated a documented precondition (bad vocabulary token, empty
// list, malformed configuration value, ...).
class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what) : Error(what) {}
};

// A structured payload failed validation. Carries the path of the first
// offending field ("overall_score", "objects[2].bbox", ...) and, when
// available, the raw payload for diagnostics.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& field_path, const std::string& what,
              std::string raw_payload = {})
      : Error(what + " (at '" + field_path + "')"),
        field_path_(field_path),
        raw_payload_(std::move(raw_payload)) {}

  const std::string& field_path() const { return field_path_; }
  const std::string& raw_payload() const { return raw_payload_; }

 private:
  std::string field_path_;
  std::string raw_payload_;
};

// A backend call failed after the configured retries.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, int attempts, bool retryable)
      : Error(what), attempts_(attempts), retryable_(retryable) {}

  int attempts() const { return attempts_; }
  bool retryable() const { return retryable_; }

 private:
  int attempts_ = 0;
  bool retryable_ = false;
};

// Filesystem failure while reading or writing an artifact.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// An internal invariant was violated; indicates a bug, not bad input.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(what) {}
};

}  // namespace rflow
