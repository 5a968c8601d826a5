#include "report.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "isoprob/format.hpp"

namespace isoprob::cli {
namespace {

nlohmann::ordered_json to_json(const Value& value) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      value);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Format parse_format(const std::string& text) {
  if (text == "text") return Format::kText;
  if (text == "csv") return Format::kCsv;
  if (text == "json") return Format::kJson;
  throw std::invalid_argument("unknown output format '" + text + "'");
}

void Record::set(const std::string& name, Value value) {
  for (auto& [key, v] : fields) {
    if (key == name) {
      v = std::move(value);
      return;
    }
  }
  fields.emplace_back(name, std::move(value));
}

const Value* Record::find(const std::string& name) const {
  for (const auto& [key, v] : fields) {
    if (key == name) return &v;
  }
  return nullptr;
}

std::string to_text(const Value& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      value);
}

void write_single(std::ostream& out, Format format, const Record& record) {
  switch (format) {
    case Format::kText: {
      std::size_t width = 0;
      for (const auto& [key, v] : record.fields) width = std::max(width, key.size());
      for (const auto& [key, v] : record.fields) {
        if (std::holds_alternative<std::monostate>(v)) continue;
        out << key << std::string(width - key.size(), ' ') << " = " << to_text(v) << '\n';
      }
      break;
    }
    case Format::kCsv: {
      std::vector<std::string> columns;
      for (const auto& [key, v] : record.fields) columns.push_back(key);
      write_table(out, format, columns, {record});
      break;
    }
    case Format::kJson: {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (const auto& [key, v] : record.fields) obj[key] = to_json(v);
      out << obj.dump(2) << '\n';
      break;
    }
  }
}

void write_table(std::ostream& out, Format format, const std::vector<std::string>& columns,
                 const std::vector<Record>& rows) {
  const auto cell = [](const Record& r, const std::string& c) {
    const Value* v = r.find(c);
    return v ? *v : Value{};
  };
  switch (format) {
    case Format::kCsv: {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "") << csv_escape(columns[i]);
      }
      out << '\n';
      for (const Record& r : rows) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
          out << (i ? "," : "") << csv_escape(to_text(cell(r, columns[i])));
        }
        out << '\n';
      }
      break;
    }
    case Format::kJson: {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const Record& r : rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (const std::string& c : columns) obj[c] = to_json(cell(r, c));
        arr.push_back(std::move(obj));
      }
      out << arr.dump(2) << '\n';
      break;
    }
    case Format::kText: {
      std::vector<std::size_t> width(columns.size());
      for (std::size_t i = 0; i < columns.size(); ++i) width[i] = columns[i].size();
      for (const Record& r : rows) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
          width[i] = std::max(width[i], to_text(cell(r, columns[i])).size());
        }
      }
      const auto line = [&](const auto& text_of) {
        std::string text;
        for (std::size_t i = 0; i < columns.size(); ++i) {
          const std::string t = text_of(i);
          text += t;
          if (i + 1 < columns.size()) text += std::string(width[i] - t.size() + 2, ' ');
        }
        text.erase(text.find_last_not_of(' ') + 1);
        out << text << '\n';
      };
      line([&](std::size_t i) { return columns[i]; });
      for (const Record& r : rows) line([&](std::size_t i) { return to_text(cell(r, columns[i])); });
      break;
    }
  }
}

}  // namespace isoprob::cli
