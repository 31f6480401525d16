#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace ht {

// Shortest-complete decimal rendering: 17 significant digits, "inf"/"-inf"/"nan" spelled out.
std::string format_real(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace ht
