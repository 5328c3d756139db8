#pragma once

// Deterministic CSV emission.  Doubles are rendered with %.17g so a value
// round-trips exactly and two runs that compute the same numbers produce the
// same bytes; no locale, no trailing whitespace, '\n' line endings.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "math_util.hpp"

namespace hetlab {

class CsvCell {
  public:
    CsvCell(double v) : text_(format_double(v)) {}
    CsvCell(int v) : text_(std::to_string(v)) {}
    CsvCell(long v) : text_(std::to_string(v)) {}
    CsvCell(std::uint64_t v) : text_(std::to_string(v)) {}
    CsvCell(const char* s) : text_(s) {}
    CsvCell(std::string s) : text_(std::move(s)) {}
    const std::string& text() const { return text_; }

  private:
    std::string text_;
};

class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
        if (columns_.empty()) throw std::invalid_argument("CsvTable: no columns");
    }

    void add_row(std::initializer_list<CsvCell> cells) {
        if (cells.size() != columns_.size())
            throw std::invalid_argument("CsvTable: row width " + std::to_string(cells.size()) +
                                        " != " + std::to_string(columns_.size()) + " columns");
        std::vector<std::string> row;
        row.reserve(cells.size());
        for (const CsvCell& c : cells) {
            if (c.text().find_first_of(",\"\n") != std::string::npos)
                throw std::invalid_argument("CsvTable: cell needs quoting, unsupported: '" +
                                            c.text() + "'");
            row.push_back(c.text());
        }
        rows_.push_back(std::move(row));
    }

    std::size_t n_rows() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

    std::string str() const {
        std::string out = join(columns_);
        for (const auto& r : rows_) out += join(r);
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);  // binary: no CRLF translation
        if (!out) throw std::runtime_error("CsvTable: cannot open " + path);
        out << str();
        if (!out) throw std::runtime_error("CsvTable: write failed: " + path);
    }

  private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        line += '\n';
        return line;
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace hetlab
