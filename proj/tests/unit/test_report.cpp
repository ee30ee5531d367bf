#include "plasthom/errors.hpp"
#include "plasthom/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace plasthom;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

ReportTable sample_table(int rows) {
    ReportTable t;
    t.name = "sample";
    t.columns = {"experiment", "epsilon", "seed", "t", "value"};
    for (int i = 0; i < rows; ++i)
        t.add_row({std::string("x"), 1.0 / (i + 1), std::uint64_t(7 + i), 0.1 * i, std::sqrt(2.0) * i});
    t.plot_x = "t";
    t.plot_y = "value";
    t.series_column = "epsilon";
    return t;
}

}  // namespace

TEST_CASE("CSV shape: header only and header plus rows") {
    CHECK(to_csv(sample_table(0)) == "experiment,epsilon,seed,t,value\r\n");
    CHECK(count_lines(to_csv(sample_table(3))) == 4);
}

TEST_CASE("RFC-4180 quoting and number formatting") {
    ReportTable t;
    t.columns = {"a", "b,c"};
    t.add_row({std::string("say \"hi\""), std::string("line\nbreak")});
    t.add_row({0.1, std::int64_t(-3)});
    CHECK(to_csv(t) == "a,\"b,c\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n0.10000000000000001,-3\r\n");
    CHECK(format_value(std::nan("")) == "nan");
    CHECK(std::stod(format_value(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS_AS(t.add_row({1.0}), ConfigError);
}

TEST_CASE("emitted files are byte-stable and errors name the path") {
    const auto dir = std::filesystem::temp_directory_path() / "plasthom_report_test";
    std::filesystem::create_directories(dir);
    const std::string csv = (dir / "t.csv").string(), svg = (dir / "t.svg").string();
    emit_report(sample_table(3), csv, svg);
    const std::string a = slurp(csv), as = slurp(svg);
    emit_report(sample_table(3), csv, svg);
    CHECK(slurp(csv) == a);
    CHECK(slurp(svg) == as);
    CHECK(as.find("<svg") == 0);
    CHECK(as.find("epsilon=1") != std::string::npos);
    // Three series of one point each.
    std::size_t lines = 0;
    for (std::size_t p = as.find("<polyline"); p != std::string::npos; p = as.find("<polyline", p + 1)) ++lines;
    CHECK(lines == 3);
    std::filesystem::remove_all(dir);

    const std::string bad = "/nonexistent-dir/x.csv";
    try {
        emit_report(sample_table(1), bad);
        FAIL("expected an I/O error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(bad) != std::string::npos);
    }
}

TEST_CASE("SVG omitted without plot columns") {
    ReportTable t = sample_table(2);
    t.plot_y.clear();
    CHECK(to_svg(t).empty());
}
