#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blrhl/model.hpp"
#include "blrhl/simgen.hpp"

namespace blrhl::cli {

/// A parsed numeric CSV: header names and rows of doubles.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Read a headered numeric CSV. Errors name the file and line.
CsvTable read_csv(const std::string& path);

/// Dataset file: header `y,x1..xp`, labels are integers.
///
/// With `contiguous_labels`, the labels must cover exactly 1..C and C is set
/// from them. Otherwise `num_classes` is taken from the caller (0 = max label).
Dataset read_dataset(const std::string& path, bool contiguous_labels = true, int num_classes = 0);
void write_dataset(const std::string& path, const Dataset& data);

void write_truth(const std::string& path, const TruthLabeling& truth);
std::vector<FeatureGroup> read_truth(const std::string& path);

/// Comma-join shortest round-trip representations.
void write_row(std::ostream& out, const double* values, std::size_t count);

/// Opens for writing or throws.
void open_for_write(std::ofstream& out, const std::string& path);

}  // namespace blrhl::cli
