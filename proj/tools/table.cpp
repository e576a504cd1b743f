#include "table.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "aoiijam/aoiijam.h"

namespace cli {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string quoted = "\"";
    for (char c : s) {
        quoted += c;
        if (c == '"') {
            quoted += '"';
        }
    }
    return quoted + "\"";
}

}  // namespace

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

void ResultTable::add(std::vector<Cell> row)
{
    if (row.size() != columns.size()) {
        throw std::logic_error("row width does not match the column count");
    }
    rows.push_back(std::move(row));
}

void ResultTable::write_csv(std::ostream& out) const
{
    out << "# command: " << command << '\n';
    out << "# version: " << aoiijam_version() << '\n';
    out << "# config: " << config.dump() << '\n';
    for (const auto& note : notes) {
        out << "# " << note << '\n';
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "") << columns[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out << ',';
            }
            std::visit(Overloaded{
                           [&](std::monostate) {},
                           [&](double v) { out << format_number(v); },
                           [&](std::int64_t v) { out << v; },
                           [&](std::uint64_t v) { out << v; },
                           [&](const std::string& v) { out << csv_field(v); },
                       },
                       row[i]);
        }
        out << '\n';
    }
}

void ResultTable::write_json(std::ostream& out) const
{
    nlohmann::json doc;
    doc["command"] = command;
    doc["version"] = aoiijam_version();
    doc["config"] = config;
    doc["notes"] = notes;
    doc["columns"] = columns;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json record = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit(Overloaded{
                           [&](std::monostate) { record[columns[i]] = nullptr; },
                           [&](double v) {
                               if (std::isfinite(v)) {
                                   record[columns[i]] = v;
                               } else {
                                   record[columns[i]] = format_number(v);
                               }
                           },
                           [&](auto v) { record[columns[i]] = v; },
                       },
                       row[i]);
        }
        doc["rows"].push_back(std::move(record));
    }
    out << doc.dump(2) << '\n';
}

}  // namespace cli
