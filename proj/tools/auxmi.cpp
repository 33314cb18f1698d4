// auxmi command-line driver.
//
//   auxmi run <config.json> [--seed S] [--threads T] [--format F]... [--out-dir D]
//   auxmi metrics --se 0.0209 --ref 0.0239 [--label L] [--rate 0.3] [--format F]
//   auxmi generate [--config C] [--n N] [--seed S] [--out-dir D]
//   auxmi impute --input data.csv [--spec spec.json] [--m M] [--seed S] [--out-dir D]
//
// Results and summaries go to stdout; failures print {"error": {...}} to
// stderr and exit nonzero.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "auxmi/dataset.hpp"
#include "auxmi/error.hpp"
#include "auxmi/harness.hpp"
#include "auxmi/mice.hpp"
#include "auxmi/report.hpp"
#include "auxmi/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kInputError = 2, kFitError = 3, kIoError = 4, kInternal = 70, kUsage = 64 };

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::vector<std::string> formats;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f, const std::string& default_out) {
  cmd->add_option("--seed", f.seed, "Master RNG seed");
  cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--format", f.formats, "Output format (csv, markdown, json); repeatable");
  f.out_dir = default_out;
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string single_format(const CommonFlags& f, const std::string& fallback) {
  if (f.formats.size() > 1) throw auxmi::ConfigError("this subcommand takes a single --format");
  return f.formats.empty() ? fallback : f.formats.front();
}

// ------------------------------------------------------------------- run

struct RunArgs {
  std::string config;
  bool dump_config = false;
};

int cmd_run(const RunArgs& args, const CommonFlags& flags) {
  auxmi::HarnessConfig cfg = auxmi::load_config(args.config);
  if (flags.seed) cfg.seed = cfg.population.seed = *flags.seed;
  if (!flags.formats.empty()) cfg.formats = flags.formats;
  cfg.validate();
  if (args.dump_config) {
    print_json(auxmi::config_to_json(cfg));
    return kOk;
  }
  std::vector<auxmi::ReportFormat> formats;
  for (const auto& f : cfg.formats) formats.push_back(auxmi::report_format_from_string(f));
  auxmi::GridResult grid = auxmi::run_grid(cfg, flags.threads);
  auto paths = auxmi::write_reports(grid, formats, flags.out_dir, cfg.basename);
  json written = json::array();
  for (const auto& p : paths) written.push_back(p.string());
  print_json({{"status", "ok"}, {"cells", grid.cells.size()}, {"reports", written}});
  return kOk;
}

// --------------------------------------------------------------- metrics

struct MetricsArgs {
  std::vector<double> se;
  std::vector<double> ref;
  std::vector<std::string> labels;
  std::vector<double> rates;
};

int cmd_metrics(const MetricsArgs& args, const CommonFlags& flags) {
  if (args.se.empty() && args.rates.empty()) throw auxmi::ConfigError("metrics: give --se/--ref pairs or --rate");
  if (args.ref.size() != args.se.size() && args.ref.size() != 1)
    throw auxmi::ConfigError("metrics: --ref must be given once or once per --se");
  if (!args.labels.empty() && args.labels.size() != args.se.size())
    throw auxmi::ConfigError("metrics: --label must be given once per --se");
  const std::string format = single_format(flags, "json");

  json rows = json::array();
  for (std::size_t i = 0; i < args.se.size(); ++i) {
    const double ref = args.ref.size() == 1 ? args.ref.front() : args.ref[i];
    auto row = auxmi::efficiency_metrics(args.se[i], ref);
    rows.push_back({{"label", args.labels.empty() ? std::to_string(i + 1) : args.labels[i]},
                    {"se", args.se[i]},
                    {"se_ref", ref},
                    {"se_diff", row.se_diff},
                    {"equiv_n_change", row.equiv_n_change},
                    {"se_diff_pct", auxmi::percent(row.se_diff)},
                    {"equiv_n_change_pct", auxmi::percent(row.equiv_n_change)}});
  }
  json bounds = json::array();
  for (double rate : args.rates) {
    auto [se_cut, n_gain] = auxmi::analytic_mcar_bounds(rate);
    bounds.push_back({{"rate", rate},
                      {"se_reduction", se_cut},
                      {"equiv_n_change", n_gain},
                      {"se_reduction_pct", auxmi::percent(se_cut)},
                      {"equiv_n_change_pct", auxmi::percent(n_gain)}});
  }

  std::ostringstream out;
  if (format == "json") {
    out << json{{"metrics", rows}, {"analytic_mcar_bounds", bounds}}.dump(2) << '\n';
  } else if (format == "csv") {
    if (!rows.empty()) out << "label,se,se_ref,se_diff,equiv_n_change,se_diff_pct,equiv_n_change_pct\n";
    for (const auto& r : rows)
      out << r["label"].get<std::string>() << ',' << auxmi::format_double(r["se"]) << ','
          << auxmi::format_double(r["se_ref"]) << ',' << auxmi::format_double(r["se_diff"]) << ','
          << auxmi::format_double(r["equiv_n_change"]) << ',' << r["se_diff_pct"] << ',' << r["equiv_n_change_pct"]
          << '\n';
    if (!bounds.empty()) out << "rate,se_reduction,equiv_n_change,se_reduction_pct,equiv_n_change_pct\n";
    for (const auto& b : bounds)
      out << auxmi::format_double(b["rate"]) << ',' << auxmi::format_double(b["se_reduction"]) << ','
          << auxmi::format_double(b["equiv_n_change"]) << ',' << b["se_reduction_pct"] << ','
          << b["equiv_n_change_pct"] << '\n';
  } else if (format == "markdown") {
    if (!rows.empty()) out << "| | SE | SE ref | Difference in SE | Equivalent change in sample size |\n|---|---:|---:|---:|---:|\n";
    for (const auto& r : rows)
      out << "| " << r["label"].get<std::string>() << " | " << auxmi::format_double(r["se"]) << " | "
          << auxmi::format_double(r["se_ref"]) << " | " << auxmi::format_percent(r["se_diff"].get<double>()) << " | "
          << auxmi::format_percent(r["equiv_n_change"].get<double>(), false) << " |\n";
    for (const auto& b : bounds)
      out << "\nMCAR " << auxmi::percent(b["rate"].get<double>()) << "%: complete data vs LD SE -"
          << b["se_reduction_pct"] << "%, sample size " << b["equiv_n_change_pct"] << "%\n";
  } else {
    throw auxmi::ConfigError("metrics: unknown format '" + format + "'");
  }

  if (flags.out_dir.empty()) {
    std::cout << out.str();
  } else {
    fs::create_directories(flags.out_dir);
    const std::string ext = format == "markdown" ? ".md" : "." + format;
    fs::path path = fs::path(flags.out_dir) / ("metrics" + ext);
    std::ofstream(path, std::ios::binary) << out.str();
    print_json({{"status", "ok"}, {"reports", {path.string()}}});
  }
  return kOk;
}

// -------------------------------------------------------------- generate

struct GenerateArgs {
  std::string config;
  std::optional<std::size_t> n;
  std::string name = "population";
};

int cmd_generate(const GenerateArgs& args, const CommonFlags& flags) {
  if (single_format(flags, "csv") != "csv") throw auxmi::ConfigError("generate: only csv output is supported");
  auxmi::PopulationConfig pop;
  if (!args.config.empty()) {
    auto cfg = auxmi::load_config(args.config);
    pop = cfg.population;
  }
  if (args.n) pop.n = *args.n;
  if (flags.seed) pop.seed = *flags.seed;
  auxmi::Population population = auxmi::generate_population(pop);

  fs::create_directories(flags.out_dir);
  fs::path data_path = fs::path(flags.out_dir) / (args.name + ".csv");
  fs::path truth_path = fs::path(flags.out_dir) / (args.name + "_truth.json");
  auxmi::save_csv(data_path, population.data);
  json tiers = json::array();
  for (std::size_t t = 0; t < population.truth.aux_tiers.size(); ++t)
    tiers.push_back({{"name", population.truth.aux_tiers[t].name},
                     {"column", auxmi::aux_column(population.truth.aux_tiers[t].name)},
                     {"target_r2", population.truth.aux_tiers[t].target_r2},
                     {"loading", population.truth.loadings[t]}});
  json truth{{"n", pop.n},
             {"seed", pop.seed},
             {"terms", population.truth.terms},
             {"true_beta", population.truth.true_beta},
             {"base_r2", population.truth.base_r2},
             {"aux_tiers", tiers}};
  std::ofstream(truth_path, std::ios::binary) << truth.dump(2) << '\n';
  print_json({{"status", "ok"}, {"rows", pop.n}, {"files", {data_path.string(), truth_path.string()}}});
  return kOk;
}

// ---------------------------------------------------------------- impute

struct ImputeArgs {
  std::string input;
  std::string spec;
  int m = 5;
  int iterations = 10;
  std::string policy = "error";
  std::string missing_token = "NA";
};

auxmi::VariableKind kind_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "continuous") return auxmi::VariableKind::continuous();
  if (kind == "binary") return auxmi::VariableKind::binary();
  if (kind == "ordinal") return auxmi::VariableKind::ordinal(j.at("levels").get<std::vector<double>>());
  throw auxmi::ConfigError("impute spec: unknown kind '" + kind + "'");
}

auxmi::ModelKind default_method(const auxmi::Variable& v) {
  switch (v.kind.tag()) {
    case auxmi::KindTag::Continuous:
      return auxmi::ModelKind::Linear;
    case auxmi::KindTag::Binary:
      return auxmi::ModelKind::Logistic;
    case auxmi::KindTag::Ordinal:
      return auxmi::ModelKind::Ordinal;
  }
  return auxmi::ModelKind::Linear;
}

int cmd_impute(const ImputeArgs& args, const CommonFlags& flags) {
  if (single_format(flags, "csv") != "csv") throw auxmi::ConfigError("impute: only csv output is supported");
  auxmi::CsvOptions csv{args.missing_token};
  auxmi::ImputationSpec spec;
  spec.m = args.m;
  spec.iterations = args.iterations;
  spec.policy = auxmi::policy_from_string(args.policy);

  auxmi::Dataset data;
  json spec_json;
  if (!args.spec.empty()) {
    std::ifstream in(args.spec);
    if (!in) throw auxmi::ConfigError("cannot open imputation spec '" + args.spec + "'");
    try {
      spec_json = json::parse(in);
    } catch (const json::parse_error& e) {
      throw auxmi::ConfigError(std::string("imputation spec is not valid JSON: ") + e.what());
    }
  }
  try {
    if (spec_json.contains("variables")) {
      std::vector<auxmi::Variable> vars;
      for (const auto& v : spec_json.at("variables")) vars.push_back({v.at("name").get<std::string>(), kind_from_json(v)});
      data = auxmi::load_csv(args.input, vars, csv);
    } else {
      data = auxmi::load_csv_inferred(args.input, csv);
    }
    if (spec_json.contains("models")) {
      for (const auto& mj : spec_json.at("models")) {
        auxmi::VariableModel model;
        model.variable = mj.at("variable").get<std::string>();
        const auto& var = data.variable(data.index_of(model.variable));
        model.method = mj.contains("method") ? auxmi::model_kind_from_string(mj.at("method").get<std::string>())
                                             : default_method(var);
        model.predictors = mj.at("predictors").get<std::vector<std::string>>();
        spec.models.push_back(std::move(model));
      }
    }
  } catch (const json::exception& e) {
    throw auxmi::ConfigError(std::string("imputation spec: ") + e.what());
  }
  if (spec.models.empty()) {
    for (std::size_t c = 0; c < data.n_vars(); ++c) {
      if (data.missing_count(c) == 0) continue;
      auxmi::VariableModel model{data.variable(c).name, default_method(data.variable(c)), {}};
      for (std::size_t k = 0; k < data.n_vars(); ++k)
        if (k != c) model.predictors.push_back(data.variable(k).name);
      spec.models.push_back(std::move(model));
    }
  }

  const std::uint64_t seed = flags.seed.value_or(1);
  auto completed = auxmi::impute(data, spec, seed, flags.threads);

  fs::create_directories(flags.out_dir);
  const std::string stem = fs::path(args.input).stem().string();
  json files = json::array();
  json fits = json::array();
  for (const auto& cd : completed) {
    fs::path path = fs::path(flags.out_dir) / (stem + "_imp" + std::to_string(cd.imputation_index + 1) + ".csv");
    auxmi::save_csv(path, cd.data, csv);
    files.push_back(path.string());
    json per = json::array();
    for (const auto& rec : cd.fits)
      per.push_back({{"variable", rec.variable},
                     {"method", auxmi::to_string(rec.method)},
                     {"fit_statistic", std::isfinite(rec.fit_statistic) ? json(rec.fit_statistic) : json(nullptr)},
                     {"predictors_used", rec.predictors_used},
                     {"dropped_predictors", rec.dropped_predictors},
                     {"aborted", rec.aborted}});
    fits.push_back({{"imputation", cd.imputation_index + 1}, {"models", per}});
  }
  print_json({{"status", "ok"}, {"seed", seed}, {"m", spec.m}, {"files", files}, {"fits", fits}});
  return kOk;
}

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
  return code;
}

int exit_code_for(const auxmi::Error& e) {
  if (e.kind() == "config_error" || e.kind() == "data_error") return kInputError;
  if (e.kind() == "io_error") return kIoError;
  return kFitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple imputation with auxiliary variables: simulation harness and tools"};
  app.require_subcommand(1);

  CommonFlags run_flags, metrics_flags, gen_flags, imp_flags;

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a replication grid from a JSON config and write reports");
  run->add_option("config", run_args.config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_flag("--dump-config", run_args.dump_config, "Print the effective config and exit");
  add_common(run, run_flags, "results");

  MetricsArgs metrics_args;
  auto* metrics = app.add_subcommand("metrics", "Efficiency rows from standard errors; analytic MCAR bounds");
  metrics->add_option("--se", metrics_args.se, "Standard error of the method; repeatable");
  metrics->add_option("--ref", metrics_args.ref, "Reference standard error; once or once per --se");
  metrics->add_option("--label", metrics_args.labels, "Row label; once per --se");
  metrics->add_option("--rate", metrics_args.rates, "MCAR rate for analytic bounds; repeatable");
  add_common(metrics, metrics_flags, "");

  GenerateArgs gen_args;
  auto* generate = app.add_subcommand("generate", "Write a synthetic population CSV and its truth record");
  generate->add_option("--config", gen_args.config, "Harness config whose population section is used")
      ->check(CLI::ExistingFile);
  generate->add_option("--n", gen_args.n, "Rows");
  generate->add_option("--name", gen_args.name, "Output file stem")->capture_default_str();
  add_common(generate, gen_flags, ".");

  ImputeArgs imp_args;
  auto* impute = app.add_subcommand("impute", "Impute a CSV by chained equations and write M completed CSVs");
  impute->add_option("--input", imp_args.input, "Incomplete CSV")->required()->check(CLI::ExistingFile);
  impute->add_option("--spec", imp_args.spec, "JSON with optional 'variables' and 'models' sections")
      ->check(CLI::ExistingFile);
  impute->add_option("--m", imp_args.m, "Number of imputations")->capture_default_str();
  impute->add_option("--iterations", imp_args.iterations, "Chained-equation cycles")->capture_default_str();
  impute->add_option("--policy", imp_args.policy, "Perfect prediction: error, drop_predictor, abort_variable")
      ->capture_default_str();
  impute->add_option("--missing-token", imp_args.missing_token, "Missing-value token")->capture_default_str();
  add_common(impute, imp_flags, "imputed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kUsage);
  }

  try {
    if (*run) return cmd_run(run_args, run_flags);
    if (*metrics) return cmd_metrics(metrics_args, metrics_flags);
    if (*generate) return cmd_generate(gen_args, gen_flags);
    if (*impute) return cmd_impute(imp_args, imp_flags);
  } catch (const auxmi::Error& e) {
    return report_error(e.kind(), e.what(), exit_code_for(e));
  } catch (const fs::filesystem_error& e) {
    return report_error("io_error", e.what(), kIoError);
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what(), kInternal);
  }
  return kUsage;
}
