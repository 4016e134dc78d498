#pragma once
#include <string>

#include <json.hpp>

namespace spinlab {

enum class ReportFormat { Csv, Markdown };

ReportFormat parse_report_format(const std::string& s);  // csv | md | markdown

// Tables from report JSON, keyed on its "kind":
//   decay        levels -> k, s_k, s_k_weighted, bound_k
//   certificate  one row per certificate (a single object or "certificates" array)
//   mix_trace    trace -> start, t, tv_exact, tv_empirical, ci
//   table        explicit "columns" and "rows"
// Rows keep the order they have in the report. Throws MalformedInput on schema mismatch.
std::string report_render(const nlohmann::json& report, ReportFormat fmt);

// 17 significant digits; inf and nan spelled out
std::string format_double(double x);

}  // namespace spinlab
