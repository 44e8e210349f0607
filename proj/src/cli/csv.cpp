#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "hadest/cli.hpp"

namespace hadest::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

}  // namespace

CsvTable read_csv(std::istream& in, std::string_view source) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view);
    if (!have_header) {
      for (auto f : fields) {
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
        t.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError(where(source, line_no) + "expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(where(source, line_no) + "not a number: '" + std::string(f) + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(std::string(source) + ": empty file (header row required)");
  if (t.rows.empty()) throw ParseError(std::string(source) + ": no data rows");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_csv(in, path);
}

Matrix table_to_matrix(const CsvTable& t) {
  Matrix m(static_cast<Index>(t.rows.size()), static_cast<Index>(t.header.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

Vector table_to_vector(const CsvTable& t, std::string_view what) {
  if (t.header.size() != 1) {
    throw ParseError(std::string(what) + " must have exactly one column");
  }
  Vector v(static_cast<Index>(t.rows.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = t.rows[static_cast<std::size_t>(i)][0];
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace hadest::cli
