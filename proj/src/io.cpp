#include "tacnode/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tacnode/error.hpp"

namespace tacnode {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

double rounded(double x, int precision) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_number(x, precision).c_str(), nullptr);
}

std::string cell(const Field& f, int precision) {
  if (const auto* d = std::get_if<double>(&f)) return format_number(*d, precision);
  if (const auto* i = std::get_if<long long>(&f)) return std::to_string(*i);
  if (const auto* u = std::get_if<std::uint64_t>(&f)) return std::to_string(*u);
  if (const auto* b = std::get_if<bool>(&f)) return *b ? "true" : "false";
  const std::string& s = std::get<std::string>(f);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

nlohmann::ordered_json jvalue(const Field& f, int precision) {
  if (const auto* d = std::get_if<double>(&f)) {
    if (!std::isfinite(*d)) return nullptr;
    return rounded(*d, precision);
  }
  if (const auto* i = std::get_if<long long>(&f)) return *i;
  if (const auto* u = std::get_if<std::uint64_t>(&f)) return *u;
  if (const auto* b = std::get_if<bool>(&f)) return *b;
  return std::get<std::string>(f);
}

}  // namespace

std::vector<std::vector<double>> read_numeric_csv(std::istream& in, const std::vector<std::string>& header,
                                                  const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool seen_header = false;
  auto fail = [&](const std::string& msg) { throw DomainError(name + ":" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split(t);
    if (!seen_header) {
      if (cells != header) fail("expected header '" + join(header) + "', got '" + t + "'");
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size())
      fail("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || p != c.data() + c.size() || !std::isfinite(v)) fail("not a finite number: '" + c + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw DomainError(name + ": missing header '" + join(header) + "'");
  if (rows.empty()) throw DomainError(name + ": no data rows");
  return rows;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_numeric_csv(in, header, path);
}

std::vector<PointConstraint> read_slices_csv(const std::string& path) {
  std::vector<PointConstraint> out;
  for (const auto& r : read_numeric_csv(path, {"t", "h"})) out.push_back({r[0], r[1]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < out.size(); ++i)
    require(out[i].t != out[i - 1].t, path + ": duplicate time t=" + format_number(out[i].t, 15));
  return out;
}

std::vector<Segment> read_profile_csv(const std::string& path) {
  std::vector<Segment> out;
  for (const auto& r : read_numeric_csv(path, {"t_start", "t_end", "h"})) out.push_back({r[0], r[1], r[2]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  return out;
}

std::vector<LimitSlice> read_limit_slices_csv(const std::string& path) {
  std::vector<LimitSlice> out;
  for (const auto& r : read_numeric_csv(path, {"T", "a"})) out.push_back({r[0], r[1]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.T < b.T; });
  for (std::size_t i = 1; i < out.size(); ++i)
    require(out[i].T != out[i - 1].T, path + ": duplicate time T=" + format_number(out[i].T, 15));
  return out;
}

std::vector<HSegment> read_limit_profile_csv(const std::string& path) {
  std::vector<HSegment> out;
  for (const auto& r : read_numeric_csv(path, {"T_start", "T_end", "H"})) out.push_back({r[0], r[1], r[2]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.T_start < b.T_start; });
  return out;
}

std::string format_number(double x, int precision) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", std::clamp(precision, 1, 17), x);
  return buf;
}

Record& Record::set(const std::string& key, Field v) {
  for (auto& [k, f] : fields)
    if (k == key) {
      f = std::move(v);
      return *this;
    }
  fields.emplace_back(key, std::move(v));
  return *this;
}

const Field* Record::get(const std::string& key) const {
  for (const auto& [k, f] : fields)
    if (k == key) return &f;
  return nullptr;
}

std::string to_csv(const Record& r, int precision) {
  std::string out;
  if (!r.columns.empty()) {
    out = join(r.columns) + "\n";
    for (const auto& row : r.rows) {
      std::vector<std::string> cells;
      for (const auto& f : row) cells.push_back(cell(f, precision));
      out += join(cells) + "\n";
    }
    return out;
  }
  std::vector<std::string> keys, vals;
  for (const auto& [k, f] : r.fields) {
    keys.push_back(k);
    vals.push_back(cell(f, precision));
  }
  return join(keys) + "\n" + join(vals) + "\n";
}

std::string to_json(const Record& r, int precision) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, f] : r.fields) j[k] = jvalue(f, precision);
  if (!r.columns.empty()) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
      nlohmann::ordered_json o = nlohmann::ordered_json::object();
      for (std::size_t c = 0; c < r.columns.size() && c < row.size(); ++c) o[r.columns[c]] = jvalue(row[c], precision);
      rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

}  // namespace tacnode
