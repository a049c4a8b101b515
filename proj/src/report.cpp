#include "rome/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rome/errors.hpp"
#include "rome/table_io.hpp"

namespace rome {

void Report::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw ValidationError("report row width does not match header");
    rows.push_back(std::move(row));
}

std::size_t Report::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ValidationError("report has no column '" + name + "'");
}

std::string Report::to_csv() const {
    std::string out;
    for (const auto& line : banner) out += "# " + line + "\n";
    auto join = [](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
        return s + "\n";
    };
    out += join(header);
    for (const auto& row : rows) out += join(row);
    return out;
}

std::string Report::to_json() const {
    nlohmann::ordered_json doc;
    doc["notes"] = banner;
    auto records = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json rec;
        for (std::size_t i = 0; i < header.size(); ++i) {
            try {
                rec[header[i]] = parse_double(row[i]);
            } catch (const ValidationError&) {
                rec[header[i]] = row[i];
            }
        }
        records.push_back(std::move(rec));
    }
    doc["rows"] = std::move(records);
    return doc.dump(2) + "\n";
}

Report parse_report_csv(const std::string& text) {
    Report report;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            report.banner.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (!have_header) {
            report.header = std::move(cells);
            have_header = true;
        } else {
            report.add_row(std::move(cells));
        }
    }
    if (!have_header) throw ValidationError("report CSV has no header");
    return report;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

ReportFormat report_format_from_string(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw ValidationError("unknown format '" + name + "' (expected csv|json)");
}

}  // namespace rome
