#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "auxmi/harness.hpp"

namespace auxmi {

enum class ReportFormat { Csv, Markdown, Json };

ReportFormat report_format_from_string(const std::string& s);
std::string extension(ReportFormat format);

/// Efficiency of `cell` against the reference estimator of its block, if present.
std::optional<EfficiencyRow> efficiency_vs_reference(const GridResult& grid, const CellResult& cell);

std::string render_csv(const GridResult& grid);
std::string render_markdown(const GridResult& grid);
nlohmann::json render_json(const GridResult& grid);

std::string emit_report(const GridResult& grid, ReportFormat format);

/// Inverse of render_json.
GridResult grid_from_json(const nlohmann::json& j);

/// Writes <out_dir>/<basename>.<ext> for each format and returns the paths.
std::vector<std::filesystem::path> write_reports(const GridResult& grid, const std::vector<ReportFormat>& formats,
                                                 const std::filesystem::path& out_dir, const std::string& basename);

}  // namespace auxmi
