#pragma once

#include <stdexcept>
#include <string>

namespace twinbeam {

// Error taxonomy mirrored by the CLI exit codes:
//   ParameterError -> 2 (bad model parameters / bad configuration)
//   DataError      -> 3 (unreadable or malformed input data, empty selections)
//   NumericalError -> 4 (undefined results: over-subtraction, R<=0 in dB,
//                        unattainable fits, truncation mass too large)

class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace twinbeam
