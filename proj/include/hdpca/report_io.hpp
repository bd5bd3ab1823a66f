#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hdpca/gof.hpp"
#include "hdpca/rank.hpp"
#include "hdpca/simlab.hpp"
#include "hdpca/variance.hpp"

namespace hdpca::io {

inline constexpr const char* kSchemaVersion = "1";

/// Columns rep, setting, statistic, value.
void write_records_csv(std::ostream& os, const sim::SimReport& report);
/// Columns setting, then the aggregate columns in table order.
void write_aggregate_csv(std::ostream& os, const sim::SimReport& report);
/// Aligned plain-text table of the aggregate rows.
void write_aggregate_text(std::ostream& os, const sim::SimReport& report);

/// Writes <dir>/<table>_records.csv and <dir>/<table>_aggregate.csv, creating dir.
/// Throws InputError when the directory or files cannot be written.
void write_report_files(const std::filesystem::path& dir, const sim::SimReport& report, bool with_json);

nlohmann::json to_json(const sim::SimReport& report, bool with_records);
nlohmann::json to_json(const VarianceEstimate& estimate);
nlohmann::json to_json(const RankReport& report);
nlohmann::json to_json(const GofReport& report, bool classical);

/// Shortest text that round-trips the double; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

}  // namespace hdpca::io
