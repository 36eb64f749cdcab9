// csv.hpp - minimal CSV emission: header row, 17 significant digits, LF.

#pragma once

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace dampsq {

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os);

    void header(std::initializer_list<std::string_view> names);
    void header(std::span<const std::string> names);
    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);

private:
    std::ostream& os_;
};

// Shortest round-trip text is not required; every value is written with
// 17 significant digits so identical doubles give identical bytes.
std::string format_double(double v);

}  // namespace dampsq
