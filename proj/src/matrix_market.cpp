#include "homog/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace homog {

void write_matrix_market(std::ostream& os, const SparseC& m) {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  char buf[128];
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseC::InnerIterator it(m, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", static_cast<int>(it.row()) + 1,
                    static_cast<int>(it.col()) + 1, it.value().real(), it.value().imag());
      os << buf;
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseC& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_matrix_market(os, m);
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

SparseC read_matrix_market(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw ParseError(lineno, "empty Matrix Market input");
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::istringstream hs(lower);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
    throw ParseError(lineno, "expected a coordinate Matrix Market header");
  }
  if (field != "complex" && field != "real" && field != "integer") {
    throw ParseError(lineno, "unsupported field '" + field + "'");
  }
  if (symmetry != "general") throw ParseError(lineno, "only general symmetry is supported");
  const bool complex = field == "complex";

  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      throw ParseError(lineno, "malformed size line");
    }
    break;
  }
  if (rows < 0) throw ParseError(lineno, "missing size line");

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  while (static_cast<long>(t.size()) < nnz && std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    long r = 0, c = 0;
    double re = 0.0, im = 0.0;
    if (!(ss >> r >> c >> re) || (complex && !(ss >> im))) {
      throw ParseError(lineno, "malformed entry");
    }
    if (r < 1 || r > rows || c < 1 || c > cols) throw ParseError(lineno, "index out of range");
    t.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), Complex(re, im));
  }
  if (static_cast<long>(t.size()) != nnz) throw ParseError(lineno, "fewer entries than declared");
  SparseC m(static_cast<int>(rows), static_cast<int>(cols));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseC read_matrix_market(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return read_matrix_market(is);
}

}  // namespace homog
