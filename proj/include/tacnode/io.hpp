#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "tacnode/kernels_limit.hpp"
#include "tacnode/scaling.hpp"

namespace tacnode {

// Numeric CSV with a fixed header. Blank lines and lines starting with '#'
// are skipped. Errors are DomainError naming the file and line.
std::vector<std::vector<double>> read_numeric_csv(std::istream& in, const std::vector<std::string>& header,
                                                  const std::string& name = "<input>");
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, const std::vector<std::string>& header);

// `t,h` rows, sorted by t. Duplicate times are rejected.
std::vector<PointConstraint> read_slices_csv(const std::string& path);
// `t_start,t_end,h` rows, sorted by t_start.
std::vector<Segment> read_profile_csv(const std::string& path);
// `T,a` rows.
std::vector<LimitSlice> read_limit_slices_csv(const std::string& path);
// `T_start,T_end,H` rows.
std::vector<HSegment> read_limit_profile_csv(const std::string& path);

// %.{precision}g; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double x, int precision);

using Field = std::variant<double, long long, std::uint64_t, std::string, bool>;

// One result: ordered key/value fields plus an optional table of rows.
struct Record {
  std::vector<std::pair<std::string, Field>> fields;
  std::vector<std::string> columns;
  std::vector<std::vector<Field>> rows;

  Record& set(const std::string& key, Field v);
  const Field* get(const std::string& key) const;
};

// CSV: the table if present, else a header line of field names and one row.
std::string to_csv(const Record& r, int precision);
// JSON object of the fields; a table becomes "rows": [{column: value}...].
std::string to_json(const Record& r, int precision);

}  // namespace tacnode
