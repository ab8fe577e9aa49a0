#include "blrhl/cli/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blrhl/cli/config.hpp"
#include "blrhl/errors.hpp"

namespace blrhl::cli {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

void open_for_write(std::ofstream& out, const std::string& path) {
  out.open(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": missing header row");
  table.header = split_line(strip_cr(line));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw ValidationError(path + " line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        row[c] = parse_double(cells[c], table.header[c]);
      } catch (const ValidationError& e) {
        throw ValidationError(path + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Dataset read_dataset(const std::string& path, bool contiguous_labels, int num_classes) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header[0] != "y") {
    throw ValidationError(path + ": first column must be named y");
  }
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    if (table.header[c] != "x" + std::to_string(c)) {
      throw ValidationError(path + ": column " + std::to_string(c + 1) + " must be named x" + std::to_string(c));
    }
  }
  Dataset data;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(table.header.size()) - 1;
  data.x.resize(n, p);
  data.y.resize(table.rows.size());
  int max_label = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const double label = row[0];
    if (label != std::floor(label) || label < 1 || label > 1e6) {
      throw ValidationError(path + " line " + std::to_string(i + 2) + ": label must be a positive integer");
    }
    data.y[static_cast<std::size_t>(i)] = static_cast<int>(label);
    max_label = std::max(max_label, static_cast<int>(label));
    for (Eigen::Index j = 0; j < p; ++j) data.x(i, j) = row[static_cast<std::size_t>(j + 1)];
  }
  if (contiguous_labels) {
    std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
    for (int y : data.y) seen[static_cast<std::size_t>(y)] = true;
    for (int c = 1; c <= max_label; ++c) {
      if (!seen[static_cast<std::size_t>(c)]) {
        throw ValidationError(path + ": class labels must be contiguous 1..C; label " + std::to_string(c) +
                              " is missing");
      }
    }
    data.num_classes = std::max(max_label, 2);
  } else {
    data.num_classes = num_classes > 0 ? num_classes : std::max(max_label, 2);
    if (max_label > data.num_classes) {
      throw ValidationError(path + ": label " + std::to_string(max_label) + " exceeds the class count " +
                            std::to_string(data.num_classes));
    }
  }
  return data;
}

void write_row(std::ostream& out, const double* values, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) out << ',';
    out << format_double(values[i]);
  }
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out;
  open_for_write(out, path);
  out << 'y';
  for (int j = 1; j <= data.p(); ++j) out << ",x" << j;
  out << '\n';
  for (int i = 0; i < data.n(); ++i) {
    out << data.y[static_cast<std::size_t>(i)];
    for (int j = 0; j < data.p(); ++j) out << ',' << format_double(data.x(i, j));
    out << '\n';
  }
  if (!out) throw ValidationError("failed writing " + path);
}

void write_truth(const std::string& path, const TruthLabeling& truth) {
  std::ofstream out;
  open_for_write(out, path);
  out << "feature,group\n";
  for (std::size_t j = 0; j < truth.groups.size(); ++j) out << j + 1 << ',' << to_string(truth.groups[j]) << '\n';
  if (!out) throw ValidationError("failed writing " + path);
}

std::vector<FeatureGroup> read_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (strip_cr(line) != "feature,group") throw ValidationError(path + ": expected header feature,group");
  std::vector<FeatureGroup> groups;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != 2 || parse_int(cells[0], "feature") != static_cast<long long>(groups.size()) + 1) {
      throw ValidationError(path + " line " + std::to_string(line_no) + ": malformed truth row");
    }
    groups.push_back(parse_feature_group(cells[1]));
  }
  return groups;
}

}  // namespace blrhl::cli
