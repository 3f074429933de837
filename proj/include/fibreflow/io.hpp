#pragma once
// Snapshot persistence and report emission.
//
// Snapshot layout (all integers and floats little-endian):
//   "FIBREFLOW1"            10 bytes
//   nx, ny, nu, nv          u32 each
//   mode                    u8  (0 symmetric, 1 full)
//   components              u8  (1 real, 2 complex, 4 Hermitian a,d,Re b,Im b)
//   name length, name       u16, bytes
//   count                   u64 = stored points * components
//   payload                 count f64, component-major
//   checksum                u32 CRC-32 of the payload bytes

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibreflow/field.hpp"

namespace fibreflow {

struct Snapshot {
    std::string name;
    std::uint32_t nx = 0, ny = 0, nu = 0, nv = 0;
    GridMode mode = GridMode::symmetric;
    std::uint8_t components = 1;
    std::vector<double> values;

    std::size_t points() const;
};

Snapshot make_snapshot(const ScalarField& f, const std::string& name);
Snapshot make_snapshot(const HermitianFormField& f, const std::string& name);

std::vector<std::uint8_t> encode_snapshot(const Snapshot& s);
/// Throws IntegrityError (truncation with byte offset, checksum) or FormatError.
Snapshot decode_snapshot(const std::vector<std::uint8_t>& bytes);

void write_snapshot(const Snapshot& s, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Rebuild fields on a grid; FormatError if dims, mode or components disagree.
ScalarField scalar_from_snapshot(const Snapshot& s, GridPtr g);
HermitianFormField form_from_snapshot(const Snapshot& s, GridPtr g);

using json = nlohmann::json;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Report {
    std::string command;
    std::string status = "ok";
    json results = json::object();
    std::map<std::string, Table> tables;
};

enum class ReportFormat { csv, json, both };
ReportFormat parse_report_format(const std::string& s);

/// Non-finite values become the strings "inf", "-inf", "nan".
json json_number(double x);

/// Shortest round-trip decimal form.
std::string format_double(double x);

std::string table_csv(const Table& t);
json report_json(const Report& r);

/// Writes <command>_report.json and/or one <table>.csv per table, plus
/// manifest.json. Unwritable directory -> ConfigError.
std::vector<std::filesystem::path> emit_report(const Report& r, const std::filesystem::path& dir, ReportFormat fmt,
                                               const json& manifest);

/// CRC-32 of the canonical dump, as 8 hex digits.
std::string config_hash(const json& config);

}  // namespace fibreflow
