#include "abcre/error.hpp"

namespace abcre {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::invalid_statistic: return "invalid-statistic";
    case Errc::support_violation: return "support-violation";
    case Errc::moment_undefined: return "moment-undefined";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::degenerate_form: return "degenerate-form";
    case Errc::incomplete_table: return "incomplete-table";
    case Errc::non_convergence: return "non-convergence";
    case Errc::quadrature_non_convergence: return "quadrature-non-convergence";
    case Errc::empty_run: return "empty-run";
    case Errc::fixture_missing: return "fixture-missing";
    case Errc::malformed_csv: return "malformed-csv";
    case Errc::empty_plot: return "empty-plot";
    case Errc::io_error: return "io-error";
    case Errc::config_error: return "config-error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace abcre
