#pragma once

#include <stdexcept>
#include <string>

namespace abcre {

enum class Errc {
  invalid_parameter,
  invalid_statistic,
  support_violation,
  moment_undefined,
  dimension_mismatch,
  degenerate_form,
  incomplete_table,
  non_convergence,
  quadrature_non_convergence,
  empty_run,
  fixture_missing,
  malformed_csv,
  empty_plot,
  io_error,
  config_error,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace abcre
