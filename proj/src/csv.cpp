#include "dampsq/csv.hpp"

#include <cstdio>

namespace dampsq {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::ostream& os) : os_(os) {}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
    bool first = true;
    for (auto n : names) {
        if (!first) os_ << ',';
        os_ << n;
        first = false;
    }
    os_ << '\n';
}

void CsvWriter::header(std::span<const std::string> names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) os_ << ',';
        os_ << names[i];
    }
    os_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os_ << ',';
        os_ << format_double(values[i]);
    }
    os_ << '\n';
}

}  // namespace dampsq
