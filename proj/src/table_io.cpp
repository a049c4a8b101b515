#include "rome/table_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rome/errors.hpp"

namespace rome {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') ++start;
        out.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw ValidationError("cannot format number");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw ValidationError("not a number: '" + text + "'");
    }
    return value;
}

LabeledTable parse_table_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (blank(line) || line[0] == '#') continue;
        rows.push_back(split(line));
    }
    if (rows.empty()) throw ValidationError("CSV has no header row");
    LabeledTable table;
    const auto& header = rows.front();
    if (header.size() < 2) throw ValidationError("CSV header needs a label column and at least one value column");
    table.column_labels.assign(header.begin() + 1, header.end());
    const auto cols = static_cast<Eigen::Index>(table.column_labels.size());
    table.values.resize(static_cast<Eigen::Index>(rows.size() - 1), cols);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (static_cast<Eigen::Index>(row.size()) != cols + 1) {
            throw ValidationError("CSV row " + std::to_string(r + 1) + " ('" + (row.empty() ? "" : row[0]) + "') has " +
                                  std::to_string(row.size()) + " cells, expected " + std::to_string(cols + 1));
        }
        table.row_labels.push_back(row[0]);
        for (Eigen::Index c = 0; c < cols; ++c) {
            try {
                table.values(static_cast<Eigen::Index>(r - 1), c) = parse_double(row[static_cast<std::size_t>(c) + 1]);
            } catch (const ValidationError& e) {
                throw ValidationError("series '" + row[0] + "', column " + std::to_string(c + 1) + ": " + e.what());
            }
        }
    }
    return table;
}

LabeledTable read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_table_csv(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::string table_to_csv(const LabeledTable& table) {
    if (static_cast<Eigen::Index>(table.row_labels.size()) != table.values.rows() ||
        static_cast<Eigen::Index>(table.column_labels.size()) != table.values.cols()) {
        throw ValidationError("table labels do not match its values");
    }
    std::string out = "series";
    for (const auto& c : table.column_labels) out += "," + c;
    out += "\n";
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        out += table.row_labels[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) out += "," + format_double(table.values(r, c));
        out += "\n";
    }
    return out;
}

void write_table_csv(const LabeledTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << table_to_csv(table);
    if (!out) throw IoError("write failed for '" + path + "'");
}

void check_labels(const LabeledTable& table, const Hierarchy& h, const std::string& what) {
    if (table.row_labels.size() != h.size()) {
        throw ValidationError(what + " has " + std::to_string(table.row_labels.size()) + " series, hierarchy has " +
                              std::to_string(h.size()));
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (table.row_labels[i] != h.labels()[i]) {
            throw ValidationError(what + ": row " + std::to_string(i + 1) + " is series '" + table.row_labels[i] +
                                  "', hierarchy order expects '" + h.labels()[i] + "'");
        }
    }
}

std::vector<std::string> numbered_labels(const std::string& prefix, std::size_t count) {
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace rome
