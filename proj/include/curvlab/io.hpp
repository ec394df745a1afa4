#pragma once

#include <string>
#include <utility>
#include <vector>

namespace curvlab {

/// Versioned CSV: `# curvlab-csv v1`, `# key: value` metadata, a header row,
/// then rows formatted with the shortest round-trip decimal form.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
    void meta(const std::string& key, double value);
    void row(const std::vector<double>& values);

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<double>> rows_;
};

struct ParsedCsv {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

ParsedCsv parse_csv(const std::string& text);

/// Plain gnuplot script plotting column `y` against column `x` of each CSV.
std::string gnuplot_script(const std::string& title, const std::vector<std::string>& csv_files, int x_col, int y_col,
                           const std::string& x_label, const std::string& y_label, bool log_y = false);

void write_text(const std::string& path, const std::string& content);
/// Creates the directory (and parents) when missing.
void ensure_directory(const std::string& path);

}  // namespace curvlab
