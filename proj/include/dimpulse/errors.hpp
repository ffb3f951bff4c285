#ifndef DIMPULSE_ERRORS_HPP
#define DIMPULSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dimpulse {

enum class Errc {
    delay_exceeds_horizon,
    empty_impulse_set,
    dimension_mismatch,
    impulse_not_in_set,
    validation_failed,
    misaligned_grid,
    config_outside_interior,
    cfl_violation,
    dependency_incomplete,
    store_incomplete,
    instance_too_large,
    invalid_argument,
    parse_error,
    schema_violation,
    version_mismatch,
    checksum_failure,
    grid_mismatch,
    numerical_failure,
    io_failure,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

    /// CLI exit code contract: 0 success, 2 validation failure,
    /// 3 input error, 4 numerical failure.
    int exit_code() const;

private:
    Errc code_;
};

} // namespace dimpulse

#endif // DIMPULSE_ERRORS_HPP
