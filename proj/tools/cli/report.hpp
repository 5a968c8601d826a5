#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace isoprob::cli {

enum class Format { kText, kCsv, kJson };

Format parse_format(const std::string& text);

// Empty (monostate) fields print as "" in CSV and null in JSON.
using Value = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Record {
  std::vector<std::pair<std::string, Value>> fields;

  void set(const std::string& name, Value value);
  const Value* find(const std::string& name) const;
};

// A single result: text "name = value" lines, one CSV row, one JSON object.
void write_single(std::ostream& out, Format format, const Record& record);

// A table with a fixed column order: text table, CSV with header, JSON array.
void write_table(std::ostream& out, Format format, const std::vector<std::string>& columns,
                 const std::vector<Record>& rows);

std::string to_text(const Value& value);

}  // namespace isoprob::cli
