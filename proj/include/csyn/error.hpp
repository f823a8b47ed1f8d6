#ifndef CSYN_ERROR_HPP
#define CSYN_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csyn {

// Malformed textual input (bracketed trees, M2 blocks, TSV lines, JSON files).
// `line` is 1-based, 0 when the error is not tied to a line.
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace csyn

#endif
