#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace sparseout {

// Plain decimal rendering used for every numeric CSV cell (no exponents).
std::string format_decimal(double value, int precision = 15);

// In-memory CSV with a fixed column count.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  // Throws InvalidInputError if the cell count differs from the header's.
  void add_row(std::vector<std::string> cells);

  std::size_t columns() const { return header_.size(); }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  // Throws IoError when the file cannot be written.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace sparseout
