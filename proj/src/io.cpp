#include "mellip/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mellip {

namespace {

struct Line {
  std::string key;
  std::vector<std::string> args;
};

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    Line line;
    std::string tok;
    while (ls >> tok) {
      if (line.key.empty()) {
        line.key = tok;
      } else {
        line.args.push_back(tok);
      }
    }
    if (!line.key.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] void parse_fail(const std::string& msg) {
  throw ToolkitError(ErrorKind::ParseError, "body file: " + msg);
}

double to_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') parse_fail("bad number '" + s + "'");
  return v;
}

// recursive descent over the tokenized lines
BodyPtr parse_block(const std::vector<Line>& lines, std::size_t& pos) {
  std::string kind;
  int dim = 0;
  double radius = 0, scale = 0, p = 0;
  bool has_radius = false, has_scale = false, has_p = false;
  std::vector<std::vector<double>> matrix_rows;
  std::vector<std::vector<double>> facets;
  std::vector<BodyPtr> children;
  bool matrix_mode = false;
  int matrix_need = 0;

  while (pos < lines.size()) {
    const Line& ln = lines[pos];
    if (ln.key == "}") {
      break;
    }
    if (matrix_mode) {
      // inside a matrix: each line is one row of `dim` decimals
      std::vector<double> row;
      row.push_back(to_double(ln.key));
      for (const auto& a : ln.args) row.push_back(to_double(a));
      if (int(row.size()) != dim) parse_fail("matrix row width mismatch");
      matrix_rows.push_back(std::move(row));
      if (--matrix_need == 0) matrix_mode = false;
      ++pos;
      continue;
    }
    if (ln.key == "kind") {
      if (ln.args.size() != 1) parse_fail("kind takes one value");
      kind = ln.args[0];
    } else if (ln.key == "dim") {
      if (ln.args.size() != 1) parse_fail("dim takes one value");
      dim = int(to_double(ln.args[0]));
      if (dim < 1 || dim > 64) parse_fail("dim out of range");
    } else if (ln.key == "radius") {
      if (ln.args.size() != 1) parse_fail("radius takes one value");
      radius = to_double(ln.args[0]);
      has_radius = true;
    } else if (ln.key == "scale") {
      if (ln.args.size() != 1) parse_fail("scale takes one value");
      scale = to_double(ln.args[0]);
      has_scale = true;
    } else if (ln.key == "p") {
      if (ln.args.size() != 1) parse_fail("p takes one value");
      p = to_double(ln.args[0]);
      has_p = true;
    } else if (ln.key == "matrix") {
      if (!ln.args.empty()) parse_fail("matrix rows start on the next line");
      if (dim == 0) parse_fail("dim must precede matrix");
      if (!matrix_rows.empty()) parse_fail("duplicate matrix");
      matrix_mode = true;
      matrix_need = dim;
    } else if (ln.key == "facet") {
      if (dim == 0) parse_fail("dim must precede facet");
      if (int(ln.args.size()) != dim + 1) parse_fail("facet needs dim+1 numbers");
      std::vector<double> f;
      for (const auto& a : ln.args) f.push_back(to_double(a));
      facets.push_back(std::move(f));
    } else if (ln.key == "child") {
      if (ln.args.size() != 1 || ln.args[0] != "{") parse_fail("child syntax: child {");
      ++pos;
      children.push_back(parse_block(lines, pos));
      if (pos >= lines.size() || lines[pos].key != "}") parse_fail("missing }");
    } else {
      parse_fail("unknown field '" + ln.key + "'");
    }
    ++pos;
  }
  if (matrix_mode) parse_fail("matrix rows truncated");
  if (kind.empty()) parse_fail("missing kind");
  if (dim == 0) parse_fail("missing dim");

  auto want = [&](bool cond, const char* msg) {
    if (!cond) parse_fail(msg);
  };
  auto mat = [&]() {
    want(int(matrix_rows.size()) == dim, "matrix required");
    Mat M(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) M(i, j) = matrix_rows[std::size_t(i)][std::size_t(j)];
    }
    return M;
  };
  auto no_extras = [&](bool allow_radius, bool allow_scale, bool allow_p,
                       bool allow_matrix, bool allow_facets, int nchildren) {
    want(allow_radius || !has_radius, "radius not valid for this kind");
    want(allow_scale || !has_scale, "scale not valid for this kind");
    want(allow_p || !has_p, "p not valid for this kind");
    want(allow_matrix || matrix_rows.empty(), "matrix not valid for this kind");
    want(allow_facets || facets.empty(), "facet not valid for this kind");
    want(int(children.size()) == nchildren, "wrong number of children");
  };

  if (kind == "ball") {
    no_extras(true, false, false, false, false, 0);
    want(has_radius, "ball needs radius");
    return make_ball(dim, radius);
  }
  if (kind == "ellipsoid") {
    no_extras(false, false, false, true, false, 0);
    return make_ellipsoid(mat());
  }
  if (kind == "cube") {
    no_extras(false, true, false, false, false, 0);
    want(has_scale, "cube needs scale");
    return make_cube(dim, scale);
  }
  if (kind == "cross") {
    no_extras(false, true, false, false, false, 0);
    want(has_scale, "cross needs scale");
    return make_cross_polytope(dim, scale);
  }
  if (kind == "lpball") {
    no_extras(false, true, true, false, false, 0);
    want(has_scale && has_p, "lpball needs p and scale");
    return make_lp_ball(dim, p, scale);
  }
  if (kind == "hpolytope") {
    no_extras(false, false, false, false, true, 0);
    want(!facets.empty(), "hpolytope needs facet lines");
    Mat A(int(facets.size()), dim);
    Vec b(int(facets.size()));
    for (std::size_t i = 0; i < facets.size(); ++i) {
      for (int j = 0; j < dim; ++j) A(int(i), j) = facets[i][std::size_t(j)];
      b[int(i)] = facets[i][std::size_t(dim)];
    }
    return make_hpolytope(std::move(A), std::move(b));
  }
  if (kind == "intersection" || kind == "hull") {
    no_extras(false, false, false, false, false, 2);
    want(children[0]->dim() == dim && children[1]->dim() == dim,
         "child dimension mismatch");
    return kind == "intersection" ? make_intersection(children[0], children[1])
                                  : make_hull(children[0], children[1]);
  }
  if (kind == "linear-image") {
    no_extras(false, false, false, true, false, 1);
    want(children[0]->dim() == dim, "child dimension mismatch");
    return apply_linear(children[0], mat());
  }
  if (kind == "difference") {
    no_extras(false, false, false, false, false, 1);
    want(children[0]->dim() == dim, "child dimension mismatch");
    return difference_body(children[0]);
  }
  parse_fail("unknown kind '" + kind + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ToolkitError(ErrorKind::ParseError, "cannot open file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

BodyPtr parse_body_text(const std::string& text) {
  auto lines = tokenize(text);
  std::size_t pos = 0;
  try {
    BodyPtr b = parse_block(lines, pos);
    if (pos != lines.size()) parse_fail("trailing content");
    return b;
  } catch (const ToolkitError& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    // semantic validation failures surface as parse errors with context
    throw ToolkitError(ErrorKind::ParseError,
                       std::string("body file: ") + e.what());
  }
}

BodyPtr parse_body_file(const std::string& path) {
  return parse_body_text(read_file(path));
}

LatticeBasis parse_lattice_text(const std::string& text) {
  auto lines = tokenize(text);
  if (lines.empty()) {
    throw ToolkitError(ErrorKind::ParseError, "lattice file: empty");
  }
  const int n = int(lines.size());
  Mat B(n, n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row;
    row.push_back(to_double(lines[std::size_t(i)].key));
    for (const auto& a : lines[std::size_t(i)].args) row.push_back(to_double(a));
    if (int(row.size()) != n) {
      throw ToolkitError(ErrorKind::ParseError,
                         "lattice file: expected n rows of n decimals");
    }
    for (int j = 0; j < n; ++j) B(i, j) = row[std::size_t(j)];
  }
  try {
    return LatticeBasis(std::move(B));
  } catch (const ToolkitError& e) {
    throw ToolkitError(ErrorKind::ParseError,
                       std::string("lattice file: ") + e.what());
  }
}

LatticeBasis parse_lattice_file(const std::string& path) {
  return parse_lattice_text(read_file(path));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ReportWriter::section(const std::string& name) {
  out_ += "[" + name + "]\n";
}
void ReportWriter::kv(const std::string& key, const std::string& value) {
  out_ += key + " " + value + "\n";
}
void ReportWriter::kv(const std::string& key, double value) {
  kv(key, format_double(value));
}
void ReportWriter::kv(const std::string& key, std::int64_t value) {
  kv(key, std::to_string(value));
}
void ReportWriter::matrix(const std::string& key, const Mat& M) {
  std::string line = key;
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) line += " " + format_double(M(i, j));
  }
  out_ += line + "\n";
}
void ReportWriter::vector(const std::string& key, const Vec& v) {
  std::string line = key;
  for (int i = 0; i < v.size(); ++i) line += " " + format_double(v[i]);
  out_ += line + "\n";
}

std::vector<ReportEntry> parse_report(const std::string& text) {
  std::vector<ReportEntry> entries;
  std::istringstream in(text);
  std::string raw, section;
  while (std::getline(in, raw)) {
    if (raw.empty()) continue;
    if (raw.front() == '[' && raw.back() == ']') {
      section = raw.substr(1, raw.size() - 2);
      continue;
    }
    auto sp = raw.find(' ');
    if (sp == std::string::npos) {
      entries.push_back({section, raw, ""});
    } else {
      entries.push_back({section, raw.substr(0, sp), raw.substr(sp + 1)});
    }
  }
  return entries;
}

}  // namespace mellip
