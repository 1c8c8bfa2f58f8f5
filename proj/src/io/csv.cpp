#include "favis/error.hpp"
#include "favis/io.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace favis {

namespace {

struct CsvRow {
    std::size_t line = 0;  // 1-based
    std::vector<std::string> fields;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line, std::size_t line_number) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"' && trim(current).empty()) {
            current.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? current : std::string(trim(current)));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    if (quoted) {
        throw ParseError(line_number, fields.size() + 1, "unterminated quoted field");
    }
    fields.push_back(was_quoted ? current : std::string(trim(current)));
    return fields;
}

// Splits text into non-blank rows; handles CRLF and a UTF-8 byte order mark.
std::vector<CsvRow> parse_rows(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::vector<CsvRow> rows;
    std::size_t line_number = 0;
    while (!text.empty()) {
        ++line_number;
        const auto end = text.find('\n');
        std::string_view line = text.substr(0, end);
        text.remove_prefix(end == std::string_view::npos ? text.size() : end + 1);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (trim(line).empty()) {
            continue;
        }
        rows.push_back({line_number, split_fields(line, line_number)});
    }
    return rows;
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    if (text.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::vector<std::string> header_names(const CsvRow& header, std::size_t skip, std::string_view prefix) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (std::size_t j = skip; j < header.fields.size(); ++j) {
        std::string name = header.fields[j];
        if (name.empty()) {
            name = std::string(prefix) + std::to_string(j - skip + 1);
        }
        if (!seen.insert(name).second) {
            throw Error(ErrorCode::DuplicateHeader, "duplicate column name '" + name + "'");
        }
        names.push_back(std::move(name));
    }
    return names;
}

void check_width(const CsvRow& row, std::size_t expected) {
    if (row.fields.size() != expected) {
        throw ParseError(row.line, std::min(row.fields.size(), expected) + 1,
                         "expected " + std::to_string(expected) + " fields, found " + std::to_string(row.fields.size()));
    }
}

std::string format_number(double value) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, end);
}

std::string quote_if_needed(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos && trim(field) == field) {
        return field;
    }
    std::string out = "\"";
    for (const char c : field) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

}  // namespace

DatasetReadResult parse_dataset_csv(std::string_view text) {
    const auto rows = parse_rows(text);
    if (rows.empty()) {
        throw Error(ErrorCode::EmptyMatrix, "dataset file has no header row");
    }
    auto names = header_names(rows.front(), 0, "V");
    const std::size_t p = names.size();

    std::vector<double> values;
    std::size_t kept = 0;
    std::size_t dropped = 0;
    std::vector<double> row_values(p);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        check_width(rows[r], p);
        bool complete = true;
        for (std::size_t j = 0; j < p && complete; ++j) {
            const auto number = parse_number(rows[r].fields[j]);
            complete = number.has_value();
            row_values[j] = number.value_or(0.0);
        }
        if (!complete) {
            ++dropped;
            continue;
        }
        values.insert(values.end(), row_values.begin(), row_values.end());
        ++kept;
    }
    if (kept < 2) {
        throw Error(ErrorCode::TooFewRows, "need at least 2 complete rows, found " + std::to_string(kept));
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Matrix data = Eigen::Map<const RowMajor>(values.data(), static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(p));

    std::vector<std::string> warnings;
    if (dropped > 0) {
        warnings.push_back("dropped " + std::to_string(dropped) + " row(s) with missing or non-numeric cells");
    }
    return {Dataset(std::move(data), std::move(names)), dropped, std::move(warnings)};
}

DatasetReadResult read_dataset_csv(const std::filesystem::path& path) {
    return parse_dataset_csv(read_text_file(path));
}

LoadingsReadResult parse_loadings_csv(std::string_view text) {
    const auto rows = parse_rows(text);
    if (rows.size() < 2 || rows.front().fields.size() < 2) {
        throw Error(ErrorCode::EmptyMatrix, "loadings file needs a header, one factor column and one variable row");
    }
    FactorModelParts parts;
    parts.factor_names = header_names(rows.front(), 1, "F");
    const std::size_t q = parts.factor_names.size();
    const std::size_t p = rows.size() - 1;
    parts.loadings = Matrix(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));

    std::set<std::string> seen;
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < p; ++i) {
        const auto& row = rows[i + 1];
        check_width(row, q + 1);
        std::string name = row.fields[0].empty() ? "V" + std::to_string(i + 1) : row.fields[0];
        if (!seen.insert(name).second) {
            throw Error(ErrorCode::DuplicateHeader, "duplicate variable name '" + name + "'");
        }
        parts.variable_names.push_back(std::move(name));
        for (std::size_t k = 0; k < q; ++k) {
            const auto number = parse_number(row.fields[k + 1]);
            if (!number) {
                throw ParseError(row.line, k + 2, "loading '" + row.fields[k + 1] + "' is not a finite number");
            }
            parts.loadings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = *number;
        }
    }
    const double largest = parts.loadings.cwiseAbs().maxCoeff();
    if (largest > 1.0) {
        warnings.push_back("loading magnitude " + format_number(largest) +
                           " exceeds 1 (possible for oblique solutions)");
    }
    parts.warnings = warnings;
    return {FactorModel(std::move(parts)), std::move(warnings)};
}

LoadingsReadResult read_loadings_csv(const std::filesystem::path& path) {
    return parse_loadings_csv(read_text_file(path));
}

std::string format_loadings_csv(const FactorModel& model) {
    std::string out = "variable";
    for (const auto& name : model.factor_names()) {
        out += "," + quote_if_needed(name);
    }
    out += "\n";
    const Matrix& lambda = model.loadings();
    for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
        out += quote_if_needed(model.variable_names()[static_cast<std::size_t>(i)]);
        for (Eigen::Index k = 0; k < lambda.cols(); ++k) {
            out += "," + format_number(lambda(i, k));
        }
        out += "\n";
    }
    return out;
}

void write_loadings_csv(const FactorModel& model, const std::filesystem::path& path) {
    write_text_file_atomic(path, format_loadings_csv(model));
}

}  // namespace favis
