#include "homog/problem_io.hpp"

#include "homog/toml_lite.hpp"

#include <fstream>
#include <sstream>

namespace homog {

namespace {

using nlohmann::json;

std::string entry_name(const std::string& field, int r, int c) {
  return field + "[" + std::to_string(r + 1) + "][" + std::to_string(c + 1) + "]";
}

ScalarField scalar_part(const json& v, const std::string& where, bool allow_pair);

ScalarField parse_scalar(const std::string& source, const std::string& where) {
  try {
    return ScalarField::from_expr(parse_expr(source));
  } catch (const ParseError& e) {
    throw ParseError(e.position(), where + ": " + e.what());
  } catch (const PeriodicityError& e) {
    throw PeriodicityError(where + ": " + e.what());
  }
}

Expr real_expr(const json& v, const std::string& where) {
  if (v.is_number()) return Expr::constant(v.get<double>());
  if (v.is_string()) {
    try {
      return parse_expr(v.get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError(e.position(), where + ": " + e.what());
    } catch (const PeriodicityError& e) {
      throw PeriodicityError(where + ": " + e.what());
    }
  }
  throw ProblemError(where + ": expected an expression string or a number");
}

ScalarField scalar_part(const json& v, const std::string& where, bool allow_pair) {
  if (v.is_number()) return ScalarField::from_expr(Expr::constant(v.get<double>()));
  if (v.is_string()) return parse_scalar(v.get<std::string>(), where);
  if (allow_pair && v.is_array() && v.size() == 2) {
    return ScalarField::from_expr(real_expr(v[0], where), real_expr(v[1], where));
  }
  throw ProblemError(where + ": expected an expression, a number or a [re, im] pair");
}

MatrixField matrix_section(const json& sec, int size, const std::string& name) {
  if (!sec.is_object()) throw ProblemError("[" + name + "] must be a table");
  const int forms = static_cast<int>(sec.contains("entries")) +
                    static_cast<int>(sec.contains("scalar")) +
                    static_cast<int>(sec.contains("diag"));
  if (forms != 1) {
    throw ProblemError("[" + name + "] needs exactly one of entries, scalar, diag");
  }
  if (sec.contains("scalar")) {
    return MatrixField::scalar(size, scalar_part(sec["scalar"], name, true));
  }
  std::vector<ScalarField> e(static_cast<std::size_t>(size * size));
  if (sec.contains("diag")) {
    const json& dg = sec["diag"];
    if (!dg.is_array() || static_cast<int>(dg.size()) != size) {
      throw ProblemError("[" + name + "] diag must have " + std::to_string(size) + " entries");
    }
    for (int i = 0; i < size; ++i) {
      e[static_cast<std::size_t>(i * size + i)] = scalar_part(dg[i], entry_name(name, i, i), true);
    }
    return MatrixField(size, size, std::move(e));
  }
  const json& rows = sec["entries"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != size) {
    throw ProblemError("[" + name + "] entries must have " + std::to_string(size) + " rows");
  }
  for (int r = 0; r < size; ++r) {
    if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != size) {
      throw ProblemError("[" + name + "] row " + std::to_string(r + 1) + " must have " +
                         std::to_string(size) + " entries");
    }
    for (int c = 0; c < size; ++c) {
      e[static_cast<std::size_t>(r * size + c)] = scalar_part(rows[r][c], entry_name(name, r, c), true);
    }
  }
  return MatrixField(size, size, std::move(e));
}

Complex complex_number(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ProblemError(where + ": expected a number or a [re, im] pair");
}

int get_int(const json& sec, const char* key, const std::string& where) {
  if (!sec.contains(key) || !sec[key].is_number_integer()) {
    throw ProblemError(where + "." + key + " must be an integer");
  }
  return sec[key].get<int>();
}

std::vector<MatrixField> indexed_sections(const json& root, const char* key, int d, int n) {
  std::vector<MatrixField> out;
  if (!root.contains(key)) return out;
  const json& sec = root[key];
  if (!sec.is_object()) throw ProblemError(std::string("[") + key + "] must be a table");
  out.assign(static_cast<std::size_t>(d), MatrixField::zero(n, n));
  for (const auto& [k, v] : sec.items()) {
    int idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoi(k, &used);
      if (used != k.size()) idx = 0;
    } catch (const std::exception&) {
      idx = 0;
    }
    if (idx < 1 || idx > d) {
      throw ProblemError(std::string("[") + key + "." + k + "]: index must be 1.." +
                         std::to_string(d));
    }
    out[static_cast<std::size_t>(idx - 1)] = matrix_section(v, n, std::string(key) + "." + k);
  }
  return out;
}

}  // namespace

Problem problem_from_json(const json& root) {
  if (!root.is_object()) throw ProblemError("problem definition must be a table");
  if (!root.contains("bstruct")) throw ProblemError("missing [bstruct]");
  const json& bs = root["bstruct"];
  Problem p;
  CoefficientSet& cs = p.cs;
  cs.bstruct.d = get_int(bs, "d", "bstruct");
  cs.bstruct.n = get_int(bs, "n", "bstruct");
  cs.bstruct.m = get_int(bs, "m", "bstruct");
  const int d = cs.bstruct.d;
  const int n = cs.bstruct.n;
  const int m = cs.bstruct.m;
  if (d < 1 || d > 2 || n < 1 || m < n) {
    throw ProblemError("bstruct: need d in {1, 2}, n >= 1 and m >= n");
  }
  if (!bs.contains("B") || !bs["B"].is_array() || static_cast<int>(bs["B"].size()) != d) {
    throw ProblemError("bstruct.B must list " + std::to_string(d) + " matrices");
  }
  for (int i = 0; i < d; ++i) {
    const json& mat = bs["B"][i];
    const std::string where = "bstruct.B[" + std::to_string(i + 1) + "]";
    if (!mat.is_array() || static_cast<int>(mat.size()) != m) {
      throw ProblemError(where + " must have " + std::to_string(m) + " rows");
    }
    CMatrix bi(m, n);
    for (int r = 0; r < m; ++r) {
      if (!mat[r].is_array() || static_cast<int>(mat[r].size()) != n) {
        throw ProblemError(where + " rows must have " + std::to_string(n) + " entries");
      }
      for (int c = 0; c < n; ++c) bi(r, c) = complex_number(mat[r][c], where);
    }
    cs.bstruct.b.push_back(bi);
  }
  if (root.contains("name")) cs.name = root["name"].get<std::string>();
  if (root.contains("length")) cs.length = root["length"].get<double>();
  if (!root.contains("A")) throw ProblemError("missing [A]");
  cs.A = matrix_section(root["A"], m, "A");
  cs.a = indexed_sections(root, "a", d, n);
  cs.b = indexed_sections(root, "b", d, n);
  if (root.contains("V")) cs.V = matrix_section(root["V"], n, "V");
  if (root.contains("G")) cs.G = matrix_section(root["G"], n, "G");
  cs.normalize();
  if (root.contains("run")) {
    if (!root["run"].is_object()) throw ProblemError("[run] must be a table");
    p.run = root["run"];
  }
  return p;
}

Problem load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json root;
  if (path.extension() == ".json") {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(e.byte, std::string("json: ") + e.what());
    }
  } else {
    root = parse_toml(text);
  }
  try {
    return problem_from_json(root);
  } catch (const json::exception& e) {
    throw ProblemError(path.string() + ": " + e.what());
  }
}

}  // namespace homog
