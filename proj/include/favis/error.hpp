#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace favis {

enum class ErrorCode {
    InvalidArgument,
    InvalidModel,
    ConstantColumn,
    InvalidCorrelation,
    Underidentified,
    NotConverged,
    DegenerateSpectrum,
    AlreadyRotated,
    EmptyGrid,
    IndexOutOfRange,
    FileNotFound,
    ParseError,
    TooFewRows,
    DuplicateHeader,
    EmptyMatrix,
    InvalidShape,
    UnsupportedVersion,
    PortInUse,
    IoError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above; the
/// CLI and the HTTP service report the code name verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::string_view name() const noexcept { return to_string(code_); }

private:
    ErrorCode code_;
};

/// Parse failure with a 1-based source location (0 when unknown).
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t column, const std::string& message);

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace favis
