#include "auxmi/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "auxmi/error.hpp"

namespace auxmi {

using nlohmann::json;

namespace {

const char* const kCsvColumns[] = {"block",         "mechanism",     "rate",        "estimator",      "tier",
                                   "regime",        "term",          "replications", "estimand",      "estimand_se",
                                   "est_mean",      "est_sd",        "mean_model_se", "total_se",     "bias",
                                   "bias_mcse",     "mean_r2",       "mean_n_used", "se_diff_vs_ref", "equiv_n_vs_ref"};

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

std::string column_title(const CellResult& c) {
  if (c.estimator == "LD") return "LD";
  if (c.estimator == "complete") return "Complete data";
  return "MI, " + (c.tier == "none" ? std::string("no auxiliaries") : c.tier + " auxiliaries");
}

}  // namespace

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  if (s == "json") return ReportFormat::Json;
  throw ConfigError("unknown report format '" + s + "' (expected csv, markdown or json)");
}

std::string extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv:
      return ".csv";
    case ReportFormat::Markdown:
      return ".md";
    case ReportFormat::Json:
      return ".json";
  }
  return "";
}

std::optional<EfficiencyRow> efficiency_vs_reference(const GridResult& grid, const CellResult& cell) {
  for (const auto& ref : grid.cells) {
    if (ref.block != cell.block || ref.estimator != grid.reference) continue;
    if (!(ref.total_se > 0.0) || !(cell.total_se > 0.0)) return std::nullopt;
    return efficiency_metrics(cell.total_se, ref.total_se);
  }
  return std::nullopt;
}

std::string render_csv(const GridResult& grid) {
  std::ostringstream out;
  for (std::size_t i = 0; i < std::size(kCsvColumns); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
  for (const auto& c : grid.cells) {
    auto eff = efficiency_vs_reference(grid, c);
    out << csv_field(c.block) << ',' << c.mechanism << ',' << num(c.rate) << ',' << csv_field(c.estimator) << ','
        << c.tier << ',' << c.regime << ',' << c.term << ',' << c.replications << ',' << num(c.estimand) << ','
        << num(c.estimand_se) << ',' << num(c.est_mean) << ',' << num(c.est_sd) << ',' << num(c.mean_model_se) << ','
        << num(c.total_se) << ',' << num(c.bias) << ',' << num(c.bias_mcse) << ',' << num(c.mean_r2) << ','
        << num(c.mean_n_used) << ',' << (eff ? num(eff->se_diff) : "NA") << ','
        << (eff ? num(eff->equiv_n_change) : "NA") << '\n';
  }
  return out.str();
}

std::string render_markdown(const GridResult& grid) {
  std::ostringstream out;
  std::vector<std::string> blocks;
  for (const auto& c : grid.cells)
    if (std::find(blocks.begin(), blocks.end(), c.block) == blocks.end()) blocks.push_back(c.block);

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<const CellResult*> cols;
    for (const auto& c : grid.cells)
      if (c.block == blocks[b]) cols.push_back(&c);
    const CellResult& first = *cols.front();
    if (b) out << '\n';
    out << "### " << char('a' + static_cast<int>(b % 26)) << ". Missing " << blocks[b] << " (" << first.term << ", "
        << first.regime << " population, R = " << first.replications << ")\n\n";

    auto row = [&](const std::string& label, auto&& cell_text) {
      out << "| " << label << " |";
      for (const auto* c : cols) out << ' ' << cell_text(*c) << " |";
      out << '\n';
    };
    out << "| |";
    for (const auto* c : cols) out << ' ' << column_title(*c) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "---:|";
    out << '\n';

    const std::string ref = grid.reference == "LD" ? "LD" : "complete data";
    row("Slope of " + first.term, [](const CellResult& c) { return fixed(c.est_mean, 4); });
    row("Standard error", [](const CellResult& c) { return fixed(c.total_se, 4); });
    row("Difference in SE vs " + ref, [&](const CellResult& c) -> std::string {
      if (c.estimator == grid.reference) return "";
      auto eff = efficiency_vs_reference(grid, c);
      return eff ? format_percent(eff->se_diff) : "";
    });
    row("Equivalent change in sample size vs " + ref, [&](const CellResult& c) -> std::string {
      if (c.estimator == grid.reference) return "";
      auto eff = efficiency_vs_reference(grid, c);
      return eff ? format_percent(eff->equiv_n_change, false) : "";
    });
    row("R² of imputation model", [](const CellResult& c) { return fixed(c.mean_r2, 2); });
    row("Bias vs pilot estimand", [](const CellResult& c) { return fixed(c.bias, 4); });
    row("Bias / Monte Carlo SE", [](const CellResult& c) { return fixed(c.bias / c.bias_mcse, 2); });

    if (first.mechanism == "MCAR") {
      auto [se_cut, n_gain] = analytic_mcar_bounds(first.rate);
      out << "\nAnalytic complete data vs LD under MCAR: SE " << format_percent(-se_cut) << ", sample size "
          << format_percent(n_gain, false) << ".\n";
    }
  }
  return out.str();
}

json render_json(const GridResult& grid) {
  json cells = json::array();
  for (const auto& c : grid.cells) {
    auto eff = efficiency_vs_reference(grid, c);
    cells.push_back({{"block", c.block},
                     {"mechanism", c.mechanism},
                     {"rate", c.rate},
                     {"estimator", c.estimator},
                     {"tier", c.tier},
                     {"regime", c.regime},
                     {"term", c.term},
                     {"replications", c.replications},
                     {"estimand", finite_or_null(c.estimand)},
                     {"estimand_se", finite_or_null(c.estimand_se)},
                     {"est_mean", finite_or_null(c.est_mean)},
                     {"est_sd", finite_or_null(c.est_sd)},
                     {"mean_model_se", finite_or_null(c.mean_model_se)},
                     {"total_se", finite_or_null(c.total_se)},
                     {"bias", finite_or_null(c.bias)},
                     {"bias_mcse", finite_or_null(c.bias_mcse)},
                     {"mean_r2", finite_or_null(c.mean_r2)},
                     {"mean_n_used", finite_or_null(c.mean_n_used)},
                     {"se_diff_vs_ref", eff ? json(eff->se_diff) : json(nullptr)},
                     {"equiv_n_vs_ref", eff ? json(eff->equiv_n_change) : json(nullptr)}});
  }
  return json{{"schema_version", kSchemaVersion}, {"reference", grid.reference}, {"cells", cells}};
}

std::string emit_report(const GridResult& grid, ReportFormat format) {
  if (grid.cells.empty()) throw ConfigError("emit_report: no results");
  switch (format) {
    case ReportFormat::Csv:
      return render_csv(grid);
    case ReportFormat::Markdown:
      return render_markdown(grid);
    case ReportFormat::Json:
      return render_json(grid).dump(2) + "\n";
  }
  return "";
}

GridResult grid_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw ConfigError("report: unsupported schema_version");
    GridResult grid;
    grid.reference = j.at("reference").get<std::string>();
    for (const auto& cj : j.at("cells")) {
      CellResult c;
      c.block = cj.at("block").get<std::string>();
      c.mechanism = cj.at("mechanism").get<std::string>();
      c.rate = cj.at("rate").get<double>();
      c.estimator = cj.at("estimator").get<std::string>();
      c.tier = cj.at("tier").get<std::string>();
      c.regime = cj.at("regime").get<std::string>();
      c.term = cj.at("term").get<std::string>();
      c.replications = cj.at("replications").get<int>();
      c.estimand = number_or_nan(cj, "estimand");
      c.estimand_se = number_or_nan(cj, "estimand_se");
      c.est_mean = number_or_nan(cj, "est_mean");
      c.est_sd = number_or_nan(cj, "est_sd");
      c.mean_model_se = number_or_nan(cj, "mean_model_se");
      c.total_se = number_or_nan(cj, "total_se");
      c.bias = number_or_nan(cj, "bias");
      c.bias_mcse = number_or_nan(cj, "bias_mcse");
      c.mean_r2 = number_or_nan(cj, "mean_r2");
      c.mean_n_used = number_or_nan(cj, "mean_n_used");
      grid.cells.push_back(std::move(c));
    }
    return grid;
  } catch (const json::exception& e) {
    throw DataError(std::string("report JSON: ") + e.what());
  }
}

std::vector<std::filesystem::path> write_reports(const GridResult& grid, const std::vector<ReportFormat>& formats,
                                                 const std::filesystem::path& out_dir, const std::string& basename) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("io_error", "cannot create output directory '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (auto format : formats) {
    auto path = out_dir / (basename + extension(format));
    std::ofstream out(path, std::ios::binary);
    out << emit_report(grid, format);
    if (!out) throw Error("io_error", "cannot write '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace auxmi
