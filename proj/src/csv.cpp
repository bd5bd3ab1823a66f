#include "hdpca/csv.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdpca/errors.hpp"

namespace hdpca {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view field)
{
    field = trim(field);
    if (field.empty()) return std::nullopt;
    if (field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

// nullopt when any field fails to parse.
std::optional<std::vector<double>> parse_row(std::string_view line)
{
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        auto v = parse_number(field);
        if (!v) return std::nullopt;
        row.push_back(*v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return row;
}

}  // namespace

DataMatrix read_csv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto row = parse_row(line);
        if (!row) {
            if (!seen_content) {
                seen_content = true;  // header
                continue;
            }
            throw InputError("malformed CSV at line " + std::to_string(line_no) + ": non-numeric field");
        }
        seen_content = true;
        if (!rows.empty() && row->size() != rows.front().size()) {
            throw InputError("malformed CSV at line " + std::to_string(line_no) + ": expected " +
                             std::to_string(rows.front().size()) + " fields, found " + std::to_string(row->size()));
        }
        rows.push_back(std::move(*row));
    }
    if (rows.empty()) throw InputError("CSV contains no numeric rows");

    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return DataMatrix(std::move(values));
}

DataMatrix read_csv_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return read_csv(in);
}

void write_csv(std::ostream& out, const DataMatrix& data)
{
    const auto& x = data.values();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (j) out << ',';
            out << x(i, j);
        }
        out << '\n';
    }
}

void write_csv_file(const std::filesystem::path& path, const DataMatrix& data)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_csv(out, data);
}

}  // namespace hdpca
