#include "stars/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "stars/error.hpp"

namespace stars::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  }
  return in;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

// Returns false if any field is not a number.
bool split_numbers(std::string_view line, char sep, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    const std::string_view field =
        line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    double v = 0.0;
    if (!parse_double(field, v)) return false;
    out.push_back(v);
    if (pos == std::string_view::npos) return true;
    start = pos + 1;
  }
}

Matrix read_numeric_rows(const std::filesystem::path& path, bool allow_header) {
  auto in = open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::vector<double> fields;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!split_numbers(view, ',', fields)) {
      if (allow_header && rows.empty() && line_no == 1) continue;
      throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) +
                                     ": non-numeric field");
    }
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(rows.front().size()) + " fields, got " +
                                     std::to_string(fields.size()));
    }
    rows.push_back(fields);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::Io, path.string() + ": no numeric rows");
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_rows(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_data_csv(const std::filesystem::path& path, const DataMatrix& data) {
  auto out = open_out(path);
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    if (j > 0) out << ',';
    out << 'x' << j;
  }
  out << '\n';
  write_rows(out, data);
  finish(out, path);
}

DataMatrix read_data_csv(const std::filesystem::path& path) { return read_numeric_rows(path, true); }

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  write_rows(out, m);
  finish(out, path);
}

Matrix read_matrix_csv(const std::filesystem::path& path) { return read_numeric_rows(path, false); }

void write_edges_tsv(const std::filesystem::path& path, const EdgeSet& edges) {
  auto out = open_out(path);
  for (const Edge& e : edges.edges()) out << e.i << '\t' << e.j << '\n';
  finish(out, path);
}

EdgeSet read_edges_tsv(const std::filesystem::path& path, int p) {
  auto in = open_in(path);
  EdgeSet edges(p);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    int i = -1;
    int j = -1;
    if (!(fields >> i >> j) || i < 0 || j < 0 || i >= p || j >= p || i == j) {
      throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": bad edge");
    }
    edges.add(i, j);
  }
  return edges;
}

void write_edges_dot(const std::filesystem::path& path, const EdgeSet& edges,
                     const std::string& name) {
  auto out = open_out(path);
  out << "graph \"" << name << "\" {\n";
  for (int v = 0; v < edges.dim(); ++v) out << "  " << v << ";\n";
  for (const Edge& e : edges.edges()) out << "  " << e.i << " -- " << e.j << ";\n";
  out << "}\n";
  finish(out, path);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  finish(out, path);
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stars::io
