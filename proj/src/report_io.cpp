#include "hdpca/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hdpca/errors.hpp"

namespace hdpca::io {

namespace {

std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

nlohmann::json number(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

nlohmann::json numbers(const std::vector<double>& v)
{
    auto out = nlohmann::json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path.string());
    return os;
}

}  // namespace

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_records_csv(std::ostream& os, const sim::SimReport& report)
{
    os << "rep,setting,statistic,value\n";
    for (const auto& r : report.records)
        os << r.rep << ',' << quote(r.setting) << ',' << r.statistic << ',' << format_number(r.value) << '\n';
}

void write_aggregate_csv(std::ostream& os, const sim::SimReport& report)
{
    if (report.rows.empty()) return;
    os << "setting";
    for (const auto& [name, _] : report.rows.front().columns) os << ',' << name;
    os << '\n';
    for (const auto& row : report.rows) {
        os << quote(row.setting);
        for (const auto& [_, v] : row.columns) os << ',' << format_number(v);
        os << '\n';
    }
}

void write_aggregate_text(std::ostream& os, const sim::SimReport& report)
{
    os << "table " << sim::to_string(report.table) << ", " << report.reps << " replications, seed " << report.seed
       << '\n';
    if (report.rows.empty()) return;
    std::size_t label_width = 7;
    for (const auto& row : report.rows) label_width = std::max(label_width, row.setting.size());
    std::vector<std::size_t> widths;
    for (const auto& [name, _] : report.rows.front().columns) widths.push_back(std::max<std::size_t>(name.size(), 10));

    os << std::left << std::setw(static_cast<int>(label_width)) << "setting";
    for (std::size_t k = 0; k < widths.size(); ++k)
        os << "  " << std::right << std::setw(static_cast<int>(widths[k])) << report.rows.front().columns[k].first;
    os << '\n';
    for (const auto& row : report.rows) {
        os << std::left << std::setw(static_cast<int>(label_width)) << row.setting;
        for (std::size_t k = 0; k < row.columns.size() && k < widths.size(); ++k) {
            std::ostringstream cell;
            cell << std::setprecision(5) << row.columns[k].second;
            os << "  " << std::right << std::setw(static_cast<int>(widths[k])) << cell.str();
        }
        os << '\n';
    }
    for (const auto& note : report.notes) os << "note: " << note << '\n';
}

void write_report_files(const std::filesystem::path& dir, const sim::SimReport& report, bool with_json)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
    const std::string stem(sim::to_string(report.table));
    {
        auto os = open_for_write(dir / (stem + "_records.csv"));
        write_records_csv(os, report);
    }
    {
        auto os = open_for_write(dir / (stem + "_aggregate.csv"));
        write_aggregate_csv(os, report);
    }
    if (with_json) {
        auto os = open_for_write(dir / (stem + ".json"));
        os << to_json(report, true).dump(2) << '\n';
    }
}

nlohmann::json to_json(const sim::SimReport& report, bool with_records)
{
    nlohmann::json j;
    j["schema"] = kSchemaVersion;
    j["table"] = sim::to_string(report.table);
    j["reps"] = report.reps;
    j["seed"] = report.seed;
    auto rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r;
        r["setting"] = row.setting;
        for (const auto& [k, v] : row.columns) r[k] = number(v);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["notes"] = report.notes;
    if (with_records) {
        auto recs = nlohmann::json::array();
        for (const auto& r : report.records)
            recs.push_back({{"rep", r.rep}, {"setting", r.setting}, {"statistic", r.statistic}, {"value", number(r.value)}});
        j["records"] = std::move(recs);
    }
    return j;
}

nlohmann::json to_json(const VarianceEstimate& e)
{
    nlohmann::json j;
    j["method"] = to_string(e.method);
    j["value"] = number(e.value);
    j["se"] = e.se ? number(*e.se) : nlohmann::json(nullptr);
    j["iterations"] = e.iterations ? nlohmann::json(*e.iterations) : nlohmann::json(nullptr);
    j["m_used"] = e.m_used;
    if (!e.spikes.empty()) j["spikes"] = numbers(e.spikes);
    if (!e.diagnostics.empty()) j["diagnostics"] = e.diagnostics;
    return j;
}

nlohmann::json to_json(const RankReport& r)
{
    nlohmann::json j;
    j["criterion"] = to_string(r.criterion);
    j["candidates"] = r.candidates;
    j["values"] = numbers(r.values);
    j["sigma2_used"] = numbers(r.sigma2_used);
    j["selected_m"] = r.selected_m;
    j["m_max"] = r.m_max;
    j["at_boundary"] = r.at_boundary();
    j["notes"] = r.notes;
    return j;
}

nlohmann::json to_json(const GofReport& r, bool classical)
{
    nlohmann::json j;
    j["m"] = r.m;
    j["level"] = r.level;
    j["l_star"] = number(r.l_star);
    j["delta_n"] = number(r.delta_n);
    j["p_value"] = number(r.p_value_clrt);
    j["critical_value"] = number(r.critical_value);
    j["reject"] = r.reject_clrt;
    j["terms"] = {{"c_n", r.terms.c},          {"mean_shift", r.terms.mean_shift}, {"h", r.terms.h},
                  {"eta", r.terms.eta},        {"beta", r.terms.beta},             {"variance", r.terms.variance},
                  {"sigma2_star", r.terms.sigma2_star}, {"alpha_hats", numbers(r.terms.alpha_hats)}};
    if (classical) {
        j["classical"] = {{"statistic", number(r.bartlett.statistic)},
                          {"df", r.bartlett.df},
                          {"p_value", number(r.bartlett.p_value)},
                          {"reject", r.reject_lrt}};
    }
    return j;
}

}  // namespace hdpca::io
