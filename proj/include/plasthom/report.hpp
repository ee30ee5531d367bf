#pragma once

// Tabular experiment output: RFC-4180 CSV and simple SVG line plots. Numbers
// are printed with 17 significant digits so identical inputs give identical
// bytes.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace plasthom {

using ReportValue = std::variant<std::string, double, std::int64_t, std::uint64_t>;

std::string format_value(const ReportValue& v);

struct ReportTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<ReportValue>> rows;

    /// Optional plot: one series per distinct value of `series_column`.
    std::string plot_x, plot_y, series_column;
    /// When set, only rows whose `filter_column` formats to `filter_value` are plotted.
    std::string filter_column, filter_value;
    bool log_x = false, log_y = false;

    /// Throws ConfigError when the row length does not match the header.
    void add_row(std::vector<ReportValue> row);
    int column(const std::string& name) const;
};

/// RFC-4180 CSV text (CRLF line endings, quoted where needed).
std::string to_csv(const ReportTable& table);

/// SVG line plot of the table's plot columns; empty string when no plot is configured.
std::string to_svg(const ReportTable& table);

/// Writes the CSV to csv_path and, if svg_path is non-empty and a plot is
/// configured, the SVG. Throws std::runtime_error naming the path on I/O failure.
void emit_report(const ReportTable& table, const std::string& csv_path, const std::string& svg_path = {});

}  // namespace plasthom
