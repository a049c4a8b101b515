#pragma once

#include <string>
#include <vector>

namespace rome {

enum class ReportFormat { Csv, Json };

/// Row-oriented text report. Banner lines are written as '#' comments in CSV
/// and as a "notes" array in JSON.
struct Report {
    std::vector<std::string> banner;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::size_t column(const std::string& name) const;
    std::string to_csv() const;
    std::string to_json() const;
    std::string render(ReportFormat format) const { return format == ReportFormat::Csv ? to_csv() : to_json(); }
};

Report parse_report_csv(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);
ReportFormat report_format_from_string(const std::string& name);

}  // namespace rome
