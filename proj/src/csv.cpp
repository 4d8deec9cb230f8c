#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "balldiv/harness.hpp"

namespace balldiv {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

LoadedCsv load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("load_csv: cannot open '" + path + "'");

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // Ignore trailing blank lines.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw std::runtime_error("load_csv: '" + path + "' is empty");

  const std::vector<std::string> header = split_csv_line(lines[0]);
  int label_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label_column) {
      label_idx = static_cast<int>(c);
      break;
    }
  if (label_idx < 0) {
    std::string cols;
    for (const auto& h : header) cols += (cols.empty() ? "" : ", ") + h;
    throw std::runtime_error("load_csv: no column named '" + label_column + "' (columns: " + cols +
                             ")");
  }
  if (header.size() < 2)
    throw std::runtime_error("load_csv: need at least one feature column besides the label");
  if (lines.size() == 1) throw std::runtime_error("load_csv: '" + path + "' has no data rows");

  std::vector<std::string> features;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (static_cast<int>(c) != label_idx) features.push_back(header[c]);

  const int dim = static_cast<int>(features.size());
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (trim(lines[r]).empty())
      throw std::runtime_error("load_csv: line " + std::to_string(r + 1) + " is blank (interior blank lines are not allowed)");
    const std::vector<std::string> cells = split_csv_line(lines[r]);
    if (cells.size() != header.size())
      throw std::runtime_error("load_csv: line " + std::to_string(r + 1) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(dim));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == label_idx) continue;
      const std::string& cell = cells[c];
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE)
        throw std::runtime_error("load_csv: line " + std::to_string(r + 1) + ", column '" +
                                 header[c] + "': cannot parse '" + cell + "' as a number");
      if (!std::isfinite(v))
        throw std::runtime_error("load_csv: line " + std::to_string(r + 1) + ", column '" +
                                 header[c] + "': non-finite value '" + cell + "'");
      values.push_back(v);
    }
    labels.push_back(cells[static_cast<std::size_t>(label_idx)]);
    rows.push_back(std::move(values));
  }

  std::map<std::string, int> label_counts;
  for (const auto& lab : labels) ++label_counts[lab];
  if (label_counts.size() != 2) {
    std::string seen;
    for (const auto& [lab, count] : label_counts)
      seen += (seen.empty() ? "" : ", ") + ("'" + lab + "'");
    throw std::runtime_error("load_csv: label column '" + label_column + "' has " +
                             std::to_string(label_counts.size()) +
                             " distinct values (need exactly 2): " + seen);
  }
  const std::string label_x = label_counts.begin()->first;   // lexicographically smaller
  const std::string label_y = std::next(label_counts.begin())->first;

  std::vector<double> buf_x, buf_y;
  int n = 0, m = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (labels[r] == label_x) {
      buf_x.insert(buf_x.end(), rows[r].begin(), rows[r].end());
      ++n;
    } else {
      buf_y.insert(buf_y.end(), rows[r].begin(), rows[r].end());
      ++m;
    }
  }
  return LoadedCsv{DataMatrix(n, dim, std::move(buf_x)), DataMatrix(m, dim, std::move(buf_y)),
                   label_x, label_y, features};
}

}  // namespace balldiv
