#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "auxmi/error.hpp"
#include "auxmi/report.hpp"

using namespace auxmi;

namespace {

const GridResult& small_grid() {
  static const GridResult grid = [] {
    HarnessConfig cfg = default_config();
    cfg.population.n = 400;
    cfg.pilot_rows = 20000;
    cfg.missingness = {{"X1", 0.3, Mechanism::MCAR, {}}, {"X1", 0.2, Mechanism::MAR, {{"Y", 1.0}}}};
    cfg.replications = 3;
    cfg.m = 3;
    cfg.iterations = 2;
    return run_grid(cfg, 2);
  }();
  return grid;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("JSON round-trips to identical cells") {
  const GridResult& g = small_grid();
  GridResult back = grid_from_json(nlohmann::json::parse(emit_report(g, ReportFormat::Json)));
  CHECK(back.reference == g.reference);
  CHECK(back.cells == g.cells);
}

TEST_CASE("CSV has a stable header and agrees with the stored values") {
  const GridResult& g = small_grid();
  auto rows = csv_rows(render_csv(g));
  REQUIRE(rows.size() == g.cells.size() + 1);
  CHECK(rows[0].front() == "block");
  CHECK(rows[0].back() == "equiv_n_vs_ref");
  CHECK(rows[0].size() == 20);
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const auto& row = rows[i + 1];
    REQUIRE(row.size() == 20);
    CHECK(row[3] == g.cells[i].estimator);
    CHECK(std::stod(row[10]) == g.cells[i].est_mean);
    CHECK(std::stod(row[13]) == g.cells[i].total_se);
    if (g.cells[i].estimator == "LD") CHECK(std::stod(row[18]) == 0.0);
    if (g.cells[i].tier.empty() || g.cells[i].estimator == "complete") CHECK(row[16] == "NA");
  }
}

TEST_CASE("markdown mirrors the table layout and the CSV numbers") {
  const GridResult& g = small_grid();
  std::string md = render_markdown(g);
  for (const char* label : {"### a. Missing MCAR 30%", "### b. Missing MAR", "| Slope of X1 |", "| Standard error |",
                            "| Difference in SE vs LD |", "| Equivalent change in sample size vs LD |",
                            "| R² of imputation model |", "Analytic complete data vs LD under MCAR: SE -16%, sample size 43%"})
    CHECK(md.find(label) != std::string::npos);
  CHECK(md.find("| | LD | MI, no auxiliaries | MI, moderate auxiliaries | MI, strong auxiliaries | Complete data |") !=
        std::string::npos);
  // The rounded SE of the first MI column matches the full-precision value.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", g.cells[1].total_se);
  CHECK(md.find(buf) != std::string::npos);
  // Percent rows come from the same efficiency arithmetic as the CSV.
  auto eff = efficiency_vs_reference(g, g.cells[4]);
  REQUIRE(eff.has_value());
  CHECK(md.find(format_percent(eff->se_diff)) != std::string::npos);
}

TEST_CASE("formats, errors and rendering that leaves values alone") {
  CHECK(report_format_from_string("md") == ReportFormat::Markdown);
  CHECK(extension(ReportFormat::Csv) == ".csv");
  CHECK_THROWS_AS(report_format_from_string("xlsx"), ConfigError);
  CHECK_THROWS_AS(emit_report(GridResult{}, ReportFormat::Csv), ConfigError);
  GridResult copy = small_grid();
  for (auto f : {ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json}) emit_report(copy, f);
  CHECK(copy.cells == small_grid().cells);
  CHECK_THROWS_AS(grid_from_json(nlohmann::json{{"schema_version", 1}}), DataError);
}

TEST_CASE("a rerun writes byte-identical reports") {
  auto dir = std::filesystem::temp_directory_path() / "auxmi_report_test";
  std::filesystem::remove_all(dir);
  HarnessConfig cfg = default_config();
  cfg.population.n = 300;
  cfg.pilot_rows = 10000;
  cfg.missingness.resize(1);
  cfg.replications = 2;
  cfg.m = 2;
  cfg.iterations = 1;
  std::vector<ReportFormat> formats{ReportFormat::Csv, ReportFormat::Json};
  auto first = write_reports(run_grid(cfg, 1), formats, dir / "a", "report");
  auto second = write_reports(run_grid(cfg, 3), formats, dir / "b", "report");
  REQUIRE(first.size() == 2);
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(slurp(first[i]) == slurp(second[i]));
  std::filesystem::remove_all(dir);
}
