#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tomato {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  degenerate_input,
  empty_input,
  misaligned,
  io,
  parse,
};

/// Stable short code, used as the diagnostic prefix by the CLI.
constexpr std::string_view code_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "E_ARG";
    case Errc::dimension_mismatch: return "E_DIM";
    case Errc::degenerate_input: return "E_DEGENERATE";
    case Errc::empty_input: return "E_EMPTY";
    case Errc::misaligned: return "E_MISALIGNED";
    case Errc::io: return "E_IO";
    case Errc::parse: return "E_PARSE";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace detail
}  // namespace tomato
