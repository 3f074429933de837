#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <zlib.h>

#include "fibreflow/error.hpp"
#include "fibreflow/io.hpp"

namespace fibreflow {

ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "both") return ReportFormat::both;
    throw ConfigError("format: expected csv, json or both (got '" + s + "')");
}

json json_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string table_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
    out += '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw Error("report: table row width does not match its header");
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_double(row[c]);
        out += '\n';
    }
    return out;
}

json report_json(const Report& r) {
    json doc = json::object();
    doc["command"] = r.command;
    doc["status"] = r.status;
    doc["results"] = r.results;
    json tables = json::object();
    for (const auto& [name, t] : r.tables) {
        json rows = json::array();
        for (const auto& row : t.rows) {
            json jr = json::array();
            for (double v : row) jr.push_back(json_number(v));
            rows.push_back(std::move(jr));
        }
        tables[name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
    }
    doc["tables"] = std::move(tables);
    return doc;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("report: cannot write " + p.string());
    out << text;
    if (!out) throw ConfigError("report: write failed for " + p.string());
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& dir, ReportFormat fmt,
                                               const json& manifest) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ConfigError("report: output directory " + dir.string() + " is not writable");
    std::vector<std::filesystem::path> written;
    if (fmt != ReportFormat::json)
        for (const auto& [name, t] : r.tables) {
            written.push_back(dir / (name + ".csv"));
            write_text(written.back(), table_csv(t));
        }
    if (fmt != ReportFormat::csv) {
        written.push_back(dir / (r.command + "_report.json"));
        write_text(written.back(), report_json(r).dump(2) + "\n");
    }
    written.push_back(dir / "manifest.json");
    write_text(written.back(), manifest.dump(2) + "\n");
    return written;
}

std::string config_hash(const json& config) {
    const std::string canon = config.dump();
    const uLong c = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(canon.data()), uInt(canon.size()));
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(c));
    return buf;
}

}  // namespace fibreflow
