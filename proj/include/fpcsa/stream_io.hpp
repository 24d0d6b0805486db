#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>

#include "fpcsa/field.hpp"

namespace fpcsa {

// Text stream of turnstile events. First line:
//   #fpcsa-stream v1 field=<spec>
// with <spec> one of gf(p), gf(2^k), or z for signed-integer values that a
// reduction prime turns into field elements at build time. Body lines:
//   <id> <value>
// where <id> is an unsigned decimal or a double-quoted token (hashed to an
// id with the keyed PRF by the consumer) and <value> is a field element in
// field mode or a signed 64-bit integer in z mode. Blank lines and lines
// starting with # are skipped. Errors carry the 1-based line number.
struct StreamEvent {
  uint64_t line = 0;
  bool is_token = false;
  uint64_t id = 0;     // set when !is_token
  std::string token;   // set when is_token
  int64_t value = 0;   // z mode
  uint64_t element = 0;  // field mode
};

class StreamReader {
 public:
  explicit StreamReader(std::istream& in);

  bool z_mode() const { return z_mode_; }
  // Present exactly when the header names a field.
  const std::optional<FieldSpec>& field() const { return field_; }

  // False at end of input.
  bool next(StreamEvent& out);

 private:
  std::istream& in_;
  bool z_mode_ = false;
  std::optional<FieldSpec> field_;
  uint64_t line_ = 0;
};

// Header line for the given mode, without the trailing newline.
std::string stream_header(const std::optional<FieldSpec>& field);

}  // namespace fpcsa
