#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace vx {

/// Column-oriented table written as CSV, JSON lines or a gnuplot data file.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    using Cell = std::variant<double, std::string>;

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw std::invalid_argument("row width does not match the table");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }

    void write_csv(std::ostream& os) const {
        for (size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << "\n";
        for (const auto& r : rows_) {
            for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format(r[i], true);
            os << "\n";
        }
    }

    void write_jsonl(std::ostream& os) const {
        for (const auto& r : rows_) {
            nlohmann::ordered_json j;
            for (size_t i = 0; i < r.size(); ++i) {
                if (auto* d = std::get_if<double>(&r[i])) {
                    if (std::isfinite(*d)) j[columns_[i]] = *d;
                    else j[columns_[i]] = nullptr;
                } else {
                    j[columns_[i]] = std::get<std::string>(r[i]);
                }
            }
            os << j.dump() << "\n";
        }
    }

    /// Whitespace-separated columns with a '#' header line.
    void write_dat(std::ostream& os) const {
        os << "#";
        for (const auto& c : columns_) os << " " << c;
        os << "\n";
        for (const auto& r : rows_) {
            for (size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << format(r[i], false);
            os << "\n";
        }
    }

private:
    static std::string format(const Cell& c, bool csv) {
        if (auto* d = std::get_if<double>(&c)) {
            if (std::isnan(*d)) return csv ? "" : "nan";
            std::ostringstream os;
            os << std::setprecision(10) << *d;
            return os.str();
        }
        const auto& s = std::get<std::string>(c);
        if (csv && s.find_first_of(",\"\n") != std::string::npos) {
            std::string q = "\"";
            for (char ch : s) {
                if (ch == '"') q += '"';
                q += ch;
            }
            return q + "\"";
        }
        return s;
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

} // namespace vx
