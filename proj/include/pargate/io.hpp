#pragma once

// Deterministic artifact plumbing.  Every number written to any artifact goes
// through one fixed 12-significant-digit formatter and every reduction feeding
// a file is ordered, so identical configurations produce byte-identical
// numeric content at any worker count.  Content hashes are FNV-1a 64.

#include <cstdint>
#include <string>
#include <vector>

namespace pargate {

std::string format_number(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  // Cell count must match the header; cells are written verbatim.
  void add_row(std::vector<std::string> cells);
  std::string serialize() const;
  int n_rows() const { return static_cast<int>(rows_.size()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

// Creates parent directories as needed; throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace pargate
