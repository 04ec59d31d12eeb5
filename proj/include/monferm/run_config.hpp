#pragma once

#include <stdexcept>
#include <string>

#include "monferm/ensemble.hpp"

namespace monferm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Strict JSON parsing: unknown keys, wrong types and out-of-range values all
// throw ConfigError with the offending path in the message. master_seed is
// accepted as a decimal string (full 64-bit range) or as a JSON integer up
// to 2^53; larger integers must be quoted to avoid double rounding.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical serialization with every default resolved; parsing it back gives
// an equivalent configuration. The config digest is FNV-1a over this text.
std::string config_to_json(const RunConfig& config);
std::string config_digest(const RunConfig& config);

}  // namespace monferm
