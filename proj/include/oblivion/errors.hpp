#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oblivion {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Crypto layer.
struct InvalidParams : Error { using Error::Error; };
struct InvalidBit : Error { using Error::Error; };
struct KeyMismatch : Error { using Error::Error; };
struct ArityMismatch : Error { using Error::Error; };
struct DepthExceeded : Error { using Error::Error; };

// Circuit / policy files.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  explicit ParseError(const std::string& what) : Error(what), line(0) {}
  std::size_t line;
};
struct TopologyError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct WidthTooLarge : Error { using Error::Error; };

// Server stores.
struct UnknownHandle : Error { using Error::Error; };
struct UnknownFunc : Error { using Error::Error; };
struct DuplicateFuncId : Error { using Error::Error; };
struct NotAdministrator : Error { using Error::Error; };

// Protocol rejections.
struct SignatureRejected : Error { using Error::Error; };
struct ServerSignatureInvalid : Error { using Error::Error; };

// Scenario harness.
struct ScenarioError : Error {
  ScenarioError(const std::string& what, std::size_t step)
      : Error(what + " (script step " + std::to_string(step) + ")"), step(step) {}
  explicit ScenarioError(const std::string& what) : Error(what), step(SIZE_MAX) {}
  std::size_t step;
};

}  // namespace oblivion
