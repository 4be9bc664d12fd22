#pragma once

#include <stdexcept>
#include <string>

namespace rcmi {

// Every library failure carries a short machine-readable code next to the
// human message so the CLI can report it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void require(bool ok, const char* code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

}  // namespace rcmi
