#include "fpcsa/stream_io.hpp"

#include <charconv>
#include <string_view>

#include "fpcsa/errors.hpp"

namespace fpcsa {
namespace {

constexpr std::string_view kHeaderPrefix = "#fpcsa-stream v1 field=";

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void skip_spaces(std::string_view& s) {
  size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  s.remove_prefix(i);
}

template <typename T>
bool parse_number(std::string_view& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr == first) return false;
  s.remove_prefix(static_cast<size_t>(ptr - first));
  return true;
}

}  // namespace

StreamReader::StreamReader(std::istream& in) : in_(in) {
  std::string line;
  if (!read_line(in_, line)) {
    throw FormatError("missing stream header", 1);
  }
  line_ = 1;
  std::string_view rest = line;
  if (rest.substr(0, kHeaderPrefix.size()) != kHeaderPrefix) {
    throw FormatError("stream header must start with '" +
                          std::string(kHeaderPrefix) + "'",
                      1);
  }
  rest.remove_prefix(kHeaderPrefix.size());
  if (rest == "z") {
    z_mode_ = true;
  } else {
    try {
      field_ = FieldSpec::parse(rest);
    } catch (const std::invalid_argument& e) {
      throw FormatError("bad field in stream header: " + std::string(e.what()),
                        1);
    }
  }
}

bool StreamReader::next(StreamEvent& out) {
  std::string line;
  while (read_line(in_, line)) {
    ++line_;
    std::string_view rest = line;
    skip_spaces(rest);
    if (rest.empty() || rest.front() == '#') continue;

    out = StreamEvent{};
    out.line = line_;
    if (rest.front() == '"') {
      rest.remove_prefix(1);
      size_t close = rest.find('"');
      if (close == std::string_view::npos) {
        throw FormatError("unterminated quoted token", line_);
      }
      out.is_token = true;
      out.token.assign(rest.substr(0, close));
      rest.remove_prefix(close + 1);
    } else {
      if (!parse_number(rest, out.id)) {
        throw FormatError("expected an unsigned id or a quoted token", line_);
      }
    }

    if (rest.empty() || (rest.front() != ' ' && rest.front() != '\t')) {
      throw FormatError("expected whitespace then a value", line_);
    }
    skip_spaces(rest);

    if (z_mode_) {
      if (!parse_number(rest, out.value)) {
        throw FormatError("expected a signed 64-bit value", line_);
      }
    } else {
      if (!parse_number(rest, out.element)) {
        throw FormatError("expected an unsigned field element", line_);
      }
      if (out.element >= field_->order()) {
        throw FormatError("value " + std::to_string(out.element) +
                              " out of range for " + field_->to_string(),
                          line_);
      }
    }

    skip_spaces(rest);
    if (!rest.empty()) {
      throw FormatError("trailing characters after value", line_);
    }
    return true;
  }
  return false;
}

std::string stream_header(const std::optional<FieldSpec>& field) {
  std::string out(kHeaderPrefix);
  out += field ? field->to_string() : "z";
  return out;
}

}  // namespace fpcsa
