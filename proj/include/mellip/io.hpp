#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "mellip/body.hpp"
#include "mellip/common.hpp"
#include "mellip/lattice.hpp"

namespace mellip {

/// Parse a body description: line-oriented `key value` fields with nested
/// `child { ... }` blocks for combinators; matrices row-major, decimal;
/// unknown fields rejected. Semantic validation happens in the body
/// constructors.
BodyPtr parse_body_text(const std::string& text);
BodyPtr parse_body_file(const std::string& path);

/// Lattice basis file: n rows of n decimals.
LatticeBasis parse_lattice_text(const std::string& text);
LatticeBasis parse_lattice_file(const std::string& path);

/// 17 significant digits: parses back to the identical double.
std::string format_double(double v);

/// Line-oriented key-value report with section headers; byte-stable across
/// runs and worker counts.
class ReportWriter {
 public:
  void section(const std::string& name);
  void kv(const std::string& key, const std::string& value);
  void kv(const std::string& key, double value);
  void kv(const std::string& key, std::int64_t value);
  void kv(const std::string& key, int value) { kv(key, std::int64_t(value)); }
  void matrix(const std::string& key, const Mat& M);
  void vector(const std::string& key, const Vec& v);
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

struct ReportEntry {
  std::string section;
  std::string key;
  std::string value;
};

/// Inverse of ReportWriter for the round-trip test harness.
std::vector<ReportEntry> parse_report(const std::string& text);

}  // namespace mellip
