#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gaitrep {

/// Numeric CSV table. Lines starting with '#' and blank lines are skipped;
/// the first remaining line is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column, or throws ParseError.
  std::size_t Column(const std::string& name) const;
};

/// Throws ValidationError if the file cannot be opened, ParseError on a
/// malformed row (the message carries the line number).
CsvTable ReadCsv(const std::filesystem::path& path);
CsvTable ParseCsv(const std::string& text, const std::string& source = "<string>");

void WriteCsv(const std::filesystem::path& path, const CsvTable& table);
std::string FormatCsv(const CsvTable& table);

/// Shortest round-trip representation, capped at 17 significant digits.
std::string FormatDouble(double value);

}  // namespace gaitrep
