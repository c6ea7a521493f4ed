#include "eigmod/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace eigmod {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(std::string_view tok, const std::string& path) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || p != last)
    throw FormatError(path + ": bad numeric token '" + std::string(tok) + "'");
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void write_value(std::FILE* f, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::fputs(buf, f);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"));
  if (!f) throw FormatError(path + ": cannot open for writing");
  return f;
}

}  // namespace

SymmetricDense read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "array" ||
      lower(field) != "real")
    throw FormatError(path + ": expected '%%MatrixMarket matrix array real symmetric' header");
  const std::string sym = lower(symmetry);
  if (sym != "symmetric" && sym != "general")
    throw FormatError(path + ": unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] != '%') break;
  }
  std::istringstream dims(line);
  long rows = 0, cols = 0;
  if (!(dims >> rows >> cols) || rows <= 0 || cols <= 0)
    throw FormatError(path + ": bad dimension line");
  if (rows != cols) throw FormatError(path + ": matrix not square");

  const std::size_t n = static_cast<std::size_t>(rows);
  Matrix m(n, n);
  auto next_value = [&](double& out) {
    while (true) {
      if (!std::getline(in, line)) return false;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '%') continue;
      out = parse_double(t, path);
      return true;
    }
  };

  if (sym == "symmetric") {
    // Column-major lower triangle.
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = j; i < n; ++i) {
        double v;
        if (!next_value(v)) throw FormatError(path + ": truncated data section");
        m(i, j) = v;
        m(j, i) = v;
      }
  } else {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        double v;
        if (!next_value(v)) throw FormatError(path + ": truncated data section");
        m(i, j) = v;
      }
  }
  try {
    return SymmetricDense::from(m);
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_matrix_market(const std::string& path, const SymmetricDense& a) {
  FilePtr f = open_for_write(path);
  std::fputs("%%MatrixMarket matrix array real symmetric\n", f.get());
  std::fprintf(f.get(), "%zu %zu\n", a.n, a.n);
  for (std::size_t j = 0; j < a.n; ++j)
    for (std::size_t i = j; i < a.n; ++i) {
      write_value(f.get(), a.entries(i, j));
      std::fputc('\n', f.get());
    }
}

std::vector<int> parse_signs(const std::string& text) {
  std::vector<int> signs;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = trim(tok);
    if (t == "+1" || t == "1" || t == "+") signs.push_back(1);
    else if (t == "-1" || t == "-") signs.push_back(-1);
    else throw FormatError("bad sign token '" + t + "'");
  }
  if (signs.empty()) throw FormatError("empty sign list");
  return signs;
}

CsvMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  CsvMatrix out;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto pos = t.find("signs:");
      if (first && pos != std::string::npos)
        out.signs = parse_signs(t.substr(pos + 6));
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    std::istringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(parse_double(trim(tok), path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path + ": no data rows");
  out.values = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) out.values(i, j) = rows[i][j];
  return out;
}

void write_csv_matrix(const std::string& path, const Matrix& m,
                      const std::optional<std::vector<int>>& signs) {
  FilePtr f = open_for_write(path);
  if (signs) {
    std::fputs("# signs: ", f.get());
    for (std::size_t i = 0; i < signs->size(); ++i)
      std::fprintf(f.get(), "%s%+d", i ? "," : "", (*signs)[i]);
    std::fputc('\n', f.get());
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) std::fputc(',', f.get());
      write_value(f.get(), m(i, j));
    }
    std::fputc('\n', f.get());
  }
}

}  // namespace eigmod
