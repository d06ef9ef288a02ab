#ifndef SMSNME_ERRORS_HPP
#define SMSNME_ERRORS_HPP

#include <functional>
#include <stdexcept>
#include <string>

namespace smsnme {

/// Parameter value outside its domain (non-SPD scale, weights off the simplex, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string &what) : std::invalid_argument(what) {}
};

/// Malformed input data or configuration.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string &what) : std::runtime_error(what) {}
};

/// Quadrature that did not converge, a sampler conditional that produced a
/// non-finite value, and similar failures of the numerics.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

using WarningSink = std::function<void(const std::string &)>;

/// Replaces the warning sink (stderr by default). Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string &message);

} // namespace smsnme

#endif
