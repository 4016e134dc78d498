#include "spinlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "spinlab/errors.hpp"

namespace spinlab {

using nlohmann::json;

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

[[noreturn]] void mismatch(const std::string& what) {
  throw Error(ErrorKind::MalformedInput, "report schema mismatch: " + what);
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  return v.dump();
}

Table rows_from(const json& arr, const std::vector<std::string>& cols, const std::string& where) {
  if (!arr.is_array()) mismatch("'" + where + "' must be an array");
  Table t{cols, {}};
  for (const auto& r : arr) {
    if (!r.is_object()) mismatch("entries of '" + where + "' must be objects");
    std::vector<std::string> row;
    for (const auto& c : cols) row.push_back(r.contains(c) ? cell(r[c]) : "");
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table build(const json& rep) {
  if (!rep.is_object() || !rep.contains("kind") || !rep["kind"].is_string())
    mismatch("missing string field 'kind'");
  const std::string kind = rep["kind"];
  if (kind == "decay")
    return rows_from(rep.value("levels", json::array()), {"k", "s_k", "s_k_weighted", "bound_k"},
                     "levels");
  if (kind == "mix_trace")
    return rows_from(rep.value("trace", json::array()),
                     {"start", "t", "tv_exact", "tv_empirical", "ci"}, "trace");
  if (kind == "certificate") {
    json arr = rep.contains("certificates") ? rep["certificates"] : json::array({rep});
    return rows_from(arr, {"regime", "potential", "mode", "alpha", "alpha_floor", "c",
                           "lemma_quantity", "lemma_reference", "passed"},
                     "certificates");
  }
  if (kind == "table") {
    if (!rep.contains("columns") || !rep["columns"].is_array()) mismatch("'columns' missing");
    Table t;
    for (const auto& c : rep["columns"]) t.columns.push_back(cell(c));
    for (const auto& r : rep.value("rows", json::array())) {
      if (!r.is_array() || r.size() != t.columns.size()) mismatch("row width differs from columns");
      std::vector<std::string> row;
      for (const auto& v : r) row.push_back(cell(v));
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  mismatch("unknown kind '" + kind + "'");
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return o + "\"";
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "md" || s == "markdown") return ReportFormat::Markdown;
  throw Error(ErrorKind::MalformedInput, "unknown report format '" + s + "'");
}

std::string report_render(const json& report, ReportFormat fmt) {
  Table t = build(report);
  std::ostringstream out;
  if (fmt == ReportFormat::Csv) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      out << (i ? "," : "") << csv_escape(t.columns[i]);
    out << "\n";
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_escape(r[i]);
      out << "\n";
    }
  } else {
    out << "|";
    for (const auto& c : t.columns) out << " " << c << " |";
    out << "\n|";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& r : t.rows) {
      out << "|";
      for (const auto& c : r) out << " " << c << " |";
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace spinlab
