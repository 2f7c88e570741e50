#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "parobs/estimates.hpp"
#include "parobs/grid.hpp"

namespace parobs::io {

std::string fmt_real(Real v);

// GridFunction serialization: CSV values (node-major, time-outer: one row per
// stored level) plus a JSON header with dims, extents, h, dt. A stride > 1
// stores every stride-th level (the header records the stored dt).
struct FieldFiles {
    std::string header;
    std::string csv;
};

FieldFiles write_grid_function(const std::filesystem::path& dir, const std::string& name,
                               const grid::GridFunction& u, int stride = 1);

grid::GridFunction read_grid_function(const std::filesystem::path& header_path);

// EstimateReport: one JSON object plus a companion CSV table, named
// {spec}_{estimate}.{json,csv}.
std::vector<std::string> write_estimate_report(const std::filesystem::path& dir,
                                               const std::string& spec_name,
                                               const estimates::EstimateReport& rep);

nlohmann::json report_to_json(const estimates::EstimateReport& rep);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

uint64_t fnv1a_hash(const std::string& data);

} // namespace parobs::io
