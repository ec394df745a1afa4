#include "curvlab/io.hpp"

#include "curvlab/config.hpp"
#include "curvlab/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace curvlab {

void CsvTable::meta(const std::string& key, double value) { meta_.emplace_back(key, format_double(value)); }

void CsvTable::row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) throw ConfigError("CSV row width differs from the header");
    rows_.push_back(values);
}

std::string CsvTable::str() const {
    std::string out = "# curvlab-csv v1\n";
    for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
    out += "\n";
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ",";
            out += format_double(r[i]);
        }
        out += "\n";
    }
    return out;
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv out;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    if (!std::getline(in, line) || line != "# curvlab-csv v1") throw ConfigError("missing curvlab CSV version line");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto c = line.find(": ");
            if (c != std::string::npos) out.meta.emplace_back(line.substr(2, c - 2), line.substr(c + 2));
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (!header) {
            while (std::getline(ss, cell, ',')) out.columns.push_back(cell);
            header = true;
            continue;
        }
        std::vector<double> r;
        while (std::getline(ss, cell, ',')) r.push_back(parse_double(cell));
        out.rows.push_back(std::move(r));
    }
    return out;
}

std::string gnuplot_script(const std::string& title, const std::vector<std::string>& csv_files, int x_col, int y_col,
                           const std::string& x_label, const std::string& y_label, bool log_y) {
    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set datafile commentschars '#'\n"
       << "set key autotitle columnhead\n"
       << "set title '" << title << "'\n"
       << "set xlabel '" << x_label << "'\n"
       << "set ylabel '" << y_label << "'\n";
    if (log_y) gp << "set logscale y\n";
    gp << "plot ";
    for (std::size_t i = 0; i < csv_files.size(); ++i) {
        if (i) gp << ", \\\n     ";
        gp << "'" << csv_files[i] << "' using " << x_col << ":" << y_col << " with lines title '" << csv_files[i] << "'";
    }
    gp << "\npause -1\n";
    return gp.str();
}

void write_text(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) ensure_directory(p.parent_path().string());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << content;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace curvlab
