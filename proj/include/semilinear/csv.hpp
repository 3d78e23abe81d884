#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include "semilinear/error.hpp"
#include "semilinear/grid.hpp"

namespace semilinear {

/// %.{precision}g; 17 digits round-trips every double.
inline std::string format_number(double v, int precision = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

using CsvCell = std::variant<double, long long, std::string>;

/// Comma-separated output with a fixed header row. Numbers are written with
/// `precision` significant digits; the body depends only on the data.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header, int precision = 17)
        : out_(path), columns_(header.size()), precision_(precision) {
        if (!out_) throw ValidationError("csv: cannot open '" + path.string() + "' for writing");
        write_row_text(header);
    }

    void row(std::initializer_list<CsvCell> cells) { row(std::vector<CsvCell>(cells)); }

    void row(const std::vector<CsvCell>& cells) {
        if (cells.size() != columns_) throw ValidationError("csv: row width does not match header");
        std::vector<std::string> text;
        text.reserve(cells.size());
        for (const auto& c : cells) {
            if (const auto* d = std::get_if<double>(&c)) text.push_back(format_number(*d, precision_));
            else if (const auto* i = std::get_if<long long>(&c)) text.push_back(std::to_string(*i));
            else text.push_back(std::get<std::string>(c));
        }
        write_row_text(text);
    }

private:
    void write_row_text(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
        out_ << '\n';
        if (!out_) throw Error("csv: write failed");
    }

    std::ofstream out_;
    std::size_t columns_;
    int precision_;
};

/// node,x[,y],<name> for every node of the field's grid.
inline void write_field_csv(const std::filesystem::path& path, const ScalarField& f, const std::string& name,
                            int precision = 17) {
    const Grid& g = f.grid();
    std::vector<std::string> header{"node", "x"};
    if (g.dim() == 2) header.push_back("y");
    header.push_back(name);
    CsvWriter w(path, header, precision);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point p = g.position(k);
        if (g.dim() == 2) w.row({static_cast<long long>(k), p.x, p.y, f[k]});
        else w.row({static_cast<long long>(k), p.x, f[k]});
    }
}

} // namespace semilinear
