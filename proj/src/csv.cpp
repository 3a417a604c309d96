#include "tabsynth/csv.hpp"

#include <fmt/format.h>

namespace tabsynth::csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

RawTable read(std::istream& in) {
    RawTable table;
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (header) {
            table.header = std::move(fields);
            header = false;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw SchemaError("line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (header) throw SchemaError("CSV input has no header row");
    return table;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        const auto& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out << '"';
            for (char c : f) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << f;
        }
    }
    out << '\n';
}

std::string format_double(double value) {
    if (value == 0.0) return "0";
    return fmt::format("{}", value);
}

}  // namespace tabsynth::csv
