#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cli {

using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, std::string>;

/// Column-stable result table, written as CSV with '#' provenance lines or
/// as one JSON document.
struct ResultTable {
    std::string command;
    nlohmann::json config;
    std::vector<std::string> notes;  // extra header lines
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
    void write_csv(std::ostream& out) const;
    void write_json(std::ostream& out) const;
};

/// %.15g, with "nan" and "inf" spelled out.
std::string format_number(double v);

}  // namespace cli
