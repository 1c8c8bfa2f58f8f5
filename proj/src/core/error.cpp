#include "favis/error.hpp"

namespace favis {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::InvalidCorrelation: return "InvalidCorrelation";
        case ErrorCode::Underidentified: return "Underidentified";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::AlreadyRotated: return "AlreadyRotated";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::DuplicateHeader: return "DuplicateHeader";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::InvalidShape: return "InvalidShape";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::PortInUse: return "PortInUse";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {
std::string located(std::size_t row, std::size_t column, const std::string& message) {
    std::string where;
    if (row > 0) {
        where += "row " + std::to_string(row);
    }
    if (column > 0) {
        where += (where.empty() ? "" : ", ") + std::string("column ") + std::to_string(column);
    }
    return where.empty() ? message : where + ": " + message;
}
}  // namespace

ParseError::ParseError(std::size_t row, std::size_t column, const std::string& message)
    : Error(ErrorCode::ParseError, located(row, column, message)), row_(row), column_(column) {}

}  // namespace favis
