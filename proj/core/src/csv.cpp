#include "hec/data/csv.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "hec/types.hpp"

namespace hec::data {

namespace {

double parse_cell(std::string_view cell, long line, int column) {
  // Trim surrounding whitespace.
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("line " + std::to_string(line) + ", column " + std::to_string(column + 1) +
                    ": not a number: '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

Mat ingest_csv(const std::filesystem::path& path, int dims) {
  if (dims < 1) throw ConfigError("dims must be >= 1");
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open " + path.string());

  std::vector<double> values;
  std::string line;
  long line_no = 0;
  long rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    int column = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view cell =
          comma == std::string_view::npos ? view.substr(start) : view.substr(start, comma - start);
      if (column >= dims) {
        throw DataError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dims) + " columns, found more");
      }
      values.push_back(parse_cell(cell, line_no, column));
      ++column;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (column != dims) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(dims) +
                      " columns, got " + std::to_string(column));
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + " has no data rows");

  Mat series(rows, dims);
  long i = 0;
  for (long r = 0; r < rows; ++r) {
    for (int c = 0; c < dims; ++c) series(r, c) = values[i++];
  }
  return series;
}

}  // namespace hec::data
