#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rome/hierarchy.hpp"

namespace rome {

/// Numeric matrix with one labelled row per series.
///
/// CSV layout: a header row `series,<col>,<col>,...` followed by one row per
/// series `<label>,<value>,...`. Lines starting with '#' are comments.
struct LabeledTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> column_labels;
    Eigen::MatrixXd values;
};

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);
double parse_double(const std::string& text);

LabeledTable read_table_csv(const std::string& path);
LabeledTable parse_table_csv(const std::string& text);
std::string table_to_csv(const LabeledTable& table);
void write_table_csv(const LabeledTable& table, const std::string& path);

/// Throws ValidationError naming the first series whose label differs from the hierarchy order.
void check_labels(const LabeledTable& table, const Hierarchy& h, const std::string& what);

/// Default column labels: prefix1, prefix2, ...
std::vector<std::string> numbered_labels(const std::string& prefix, std::size_t count);

}  // namespace rome
