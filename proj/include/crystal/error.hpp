#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crystal {

// Process exit codes used by the CLI. Library errors carry the code they
// map onto so the tool layer stays a thin switch.
enum class exit_code : int {
  ok = 0,
  internal = 1,
  usage = 2,
  config = 3,
  invariant = 4,
  exchange = 5,
};

class error : public std::runtime_error {
public:
  explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
  virtual exit_code code() const noexcept { return exit_code::internal; }
};

// Rejected parameter or violated precondition: non-power-of-two process
// count, dimension out of range, partner-offset collision, bad sweep spec.
class validation_error : public error {
public:
  using error::error;
  exit_code code() const noexcept override { return exit_code::usage; }
};

// Unreadable or malformed input file (machine model, pattern CSV).
class config_error : public error {
public:
  using error::error;
  exit_code code() const noexcept override { return exit_code::config; }
};

// Encoding a transfer buffer would exceed the configured byte cap.
class capacity_error : public error {
public:
  capacity_error(std::size_t required, std::size_t available, const std::string& context = {})
      : error("transfer buffer needs " + std::to_string(required) + " bytes but cap is " +
              std::to_string(available) + (context.empty() ? "" : " (" + context + ")")),
        required_(required),
        available_(available) {}
  std::size_t required_bytes() const noexcept { return required_; }
  std::size_t available_bytes() const noexcept { return available_; }
  exit_code code() const noexcept override { return exit_code::exchange; }

private:
  std::size_t required_;
  std::size_t available_;
};

// Malformed frame while decoding a transfer buffer.
class decode_error : public error {
public:
  decode_error(std::size_t offset, const std::string& what_arg)
      : error(what_arg + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  exit_code code() const noexcept override { return exit_code::exchange; }

private:
  std::size_t offset_;
};

// A broken internal invariant, e.g. a message still undelivered after the
// final step. Must be impossible; kept as a defensive check.
class internal_error : public error {
public:
  using error::error;
  exit_code code() const noexcept override { return exit_code::invariant; }
};

// Wraps another error with extra context (e.g. which sweep point failed)
// while keeping its exit code.
class annotated_error : public error {
public:
  annotated_error(const std::string& what_arg, exit_code code) : error(what_arg), code_(code) {}
  exit_code code() const noexcept override { return code_; }

private:
  exit_code code_;
};

}  // namespace crystal
