#include "tsproj/csv.hpp"

#include "tsproj/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace tsproj {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

}  // namespace

TimeSeries load_series_csv(const std::filesystem::path& path, std::optional<int> period) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.empty() || fields.size() > 2) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected one or two columns");
        }
        const auto value = parse_double(fields.back());
        if (first_content) {
            first_content = false;
            columns = fields.size();
            if (!value) continue;  // header row
        }
        if (fields.size() != columns) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
        }
        if (!value || !std::isfinite(*value)) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": missing or non-finite value '" +
                          fields.back() + "'");
        }
        values.push_back(*value);
    }
    if (values.empty()) throw IoError("'" + path.string() + "' contains no observations");
    std::string name = path.stem().string();
    try {
        return TimeSeries(std::move(values), period, std::move(name));
    } catch (const ArgumentError& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

void write_series_csv(const std::filesystem::path& path, std::span<const double> values) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "t,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) out << (i + 1) << ',' << values[i] << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace tsproj
