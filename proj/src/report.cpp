#include "plasthom/report.hpp"

#include "plasthom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace plasthom {

namespace {

std::string number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string tick(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

bool numeric(const ReportValue& v, double& x) {
    if (const auto* d = std::get_if<double>(&v)) {
        x = *d;
    } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
        x = static_cast<double>(*i);
    } else if (const auto* u = std::get_if<std::uint64_t>(&v)) {
        x = static_cast<double>(*u);
    } else {
        return false;
    }
    return std::isfinite(x);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << text;
    os.close();
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace

std::string format_value(const ReportValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* d = std::get_if<double>(&v)) return number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    return std::to_string(std::get<std::uint64_t>(v));
}

void ReportTable::add_row(std::vector<ReportValue> row) {
    if (row.size() != columns.size())
        throw ConfigError("report row has " + std::to_string(row.size()) + " values, expected " +
                          std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

int ReportTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

std::string to_csv(const ReportTable& table) {
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out += ',';
        out += quote(table.columns[j]);
    }
    out += "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += quote(format_value(row[j]));
        }
        out += "\r\n";
    }
    return out;
}

std::string to_svg(const ReportTable& table) {
    const int cx = table.column(table.plot_x), cy = table.column(table.plot_y);
    if (cx < 0 || cy < 0) return {};
    const int cs = table.column(table.series_column);
    const int cf = table.column(table.filter_column);

    // Series in order of first appearance.
    std::vector<std::string> names;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& row : table.rows) {
        double x, y;
        if (cf >= 0 && format_value(row[cf]) != table.filter_value) continue;
        if (!numeric(row[cx], x) || !numeric(row[cy], y)) continue;
        if ((table.log_x && x <= 0) || (table.log_y && y <= 0)) continue;
        const std::string key = cs >= 0 ? format_value(row[cs]) : std::string();
        if (!series.count(key)) names.push_back(key);
        series[key].emplace_back(table.log_x ? std::log10(x) : x, table.log_y ? std::log10(y) : y);
    }

    const double W = 640, H = 420, L = 70, R = 150, T = 30, B = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    for (const auto& [k, pts] : series)
        for (const auto& [x, y] : pts) {
            if (first) {
                x0 = x1 = x;
                y0 = y1 = y;
                first = false;
            }
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << xml_escape(table.name) << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    const std::string xl = (table.log_x ? "log10 " : "") + table.plot_x;
    const std::string yl = (table.log_y ? "log10 " : "") + table.plot_y;
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"12\">" << xml_escape(xl)
       << "</text>\n";
    os << "<text x=\"10\" y=\"" << T - 8 << "\" font-size=\"12\">" << xml_escape(yl) << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        os << "<text x=\"" << px(xv) - 15 << "\" y=\"" << H - B + 16 << "\" font-size=\"10\">" << tick(xv)
           << "</text>\n";
        os << "<text x=\"5\" y=\"" << py(yv) + 4 << "\" font-size=\"10\">" << tick(yv)
           << "</text>\n";
    }
    for (std::size_t s = 0; s < names.size(); ++s) {
        auto pts = series[names[s]];
        std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        const char* c = colors[s % 7];
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            os << (i ? " " : "") << number(px(pts[i].first)) << ',' << number(py(pts[i].second));
        os << "\"/>\n";
        for (const auto& [x, y] : pts)
            os << "<circle cx=\"" << number(px(x)) << "\" cy=\"" << number(py(y)) << "\" r=\"2.5\" fill=\"" << c << "\"/>\n";
        const std::string label = table.series_column.empty() ? table.plot_y : table.series_column + "=" + names[s];
        os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" font-size=\"11\" fill=\"" << c << "\">"
           << xml_escape(label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_report(const ReportTable& table, const std::string& csv_path, const std::string& svg_path) {
    write_file(csv_path, to_csv(table));
    if (!svg_path.empty()) {
        const std::string svg = to_svg(table);
        if (!svg.empty()) write_file(svg_path, svg);
    }
}

}  // namespace plasthom
