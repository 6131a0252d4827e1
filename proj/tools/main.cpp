#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prevalence/annotation.hpp"
#include "prevalence/ingest.hpp"
#include "prevalence/joint.hpp"
#include "prevalence/report.hpp"
#include "prevalence/retrieval.hpp"
#include "prevalence/validation.hpp"

namespace {

using namespace prevalence;

AnalysisUnit::Kind parse_unit_kind(const std::string& s) {
  if (s == "language") return AnalysisUnit::Kind::Language;
  if (s == "platform") return AnalysisUnit::Kind::Platform;
  if (s == "platform-language") return AnalysisUnit::Kind::PlatformLanguage;
  throw CLI::ValidationError("--unit", "expected language|platform|platform-language");
}

PrevalenceDefinition parse_definition(const std::string& s) {
  if (s == "restricted") return PrevalenceDefinition::Restricted;
  if (s == "total") return PrevalenceDefinition::Total;
  throw CLI::ValidationError("--definition", "expected restricted|total");
}

EstimatorMethod parse_method(const std::string& s) {
  if (s == "baseline") return EstimatorMethod::Baseline;
  if (s == "annotation") return EstimatorMethod::Annotation;
  if (s == "retrieval") return EstimatorMethod::Retrieval;
  if (s == "joint") return EstimatorMethod::Joint;
  throw CLI::ValidationError("--method", "expected baseline|annotation|retrieval|joint");
}

Corpus load_corpus(const std::string& path) {
  ParseResult parsed = parse_corpus(path);
  for (const auto& error : parsed.errors) {
    std::cerr << "row error [" << to_string(error.kind) << "] row " << error.row << ": "
              << error.detail << "\n";
  }
  if (!parsed.errors.empty() && parsed.rows.empty()) {
    throw std::runtime_error("no valid rows in " + path);
  }
  for (const auto& error : parsed.errors) {
    if (error.kind == RowError::Kind::MissingColumn) {
      throw std::runtime_error("input schema error in " + path);
    }
  }
  return preprocess(std::move(parsed.rows), path);
}

std::vector<AnalysisUnit> select_units(const Corpus& corpus, AnalysisUnit::Kind kind,
                                       const std::string& unit_key) {
  std::vector<AnalysisUnit> units = enumerate_units(corpus, kind);
  if (!unit_key.empty()) {
    std::erase_if(units, [&](const AnalysisUnit& u) { return u.key() != unit_key; });
    if (units.empty()) throw std::runtime_error("no unit matches key: " + unit_key);
  }
  return units;
}

int run_estimate(const std::string& input, const std::string& unit_name,
                 const std::string& unit_key, const std::vector<std::string>& method_names,
                 const std::string& definition_name, const EstimationParams& params,
                 const std::string& format_name, const std::string& out_path,
                 const std::string& export_dist, std::uint64_t max_points) {
  const Corpus corpus = load_corpus(input);
  const auto kind = parse_unit_kind(unit_name);
  const auto def = parse_definition(definition_name);
  const std::vector<AnalysisUnit> units = select_units(corpus, kind, unit_key);

  std::vector<EstimatorMethod> methods;
  for (const auto& name : method_names) methods.push_back(parse_method(name));

  ReportFormat format = ReportFormat::Json;
  if (format_name == "csv") {
    format = ReportFormat::Csv;
  } else if (format_name == "md") {
    format = ReportFormat::Markdown;
  } else if (format_name != "json") {
    throw CLI::ValidationError("--format", "expected json|csv|md");
  }

  const EstimationRun run = run_estimation(corpus, units, methods, def, params);
  emit_report(run, format, out_path);

  if (!export_dist.empty()) {
    if (units.size() != 1 || methods.size() != 1) {
      throw std::runtime_error("--export-dist needs exactly one unit (use --unit-key) and one method");
    }
    const UnitSlice slice = slice_by_unit(corpus, units[0]);
    RandomStream cell_stream = RandomStream(params.seed)
                                   .substream(units[0].key())
                                   .substream(to_string(methods[0]));
    std::vector<double> samples;
    switch (methods[0]) {
      case EstimatorMethod::Annotation: {
        const auto matrix = build_reference_matrix(slice.posts);
        samples = simulate_annotation(slice.posts, matrix, params.sims, cell_stream, def).samples;
        break;
      }
      case EstimatorMethod::Retrieval:
        samples = bootstrap_retrieval(keyword_pool(slice.posts), params.b_kw, params.b_post,
                                      cell_stream, def)
                      .samples;
        break;
      case EstimatorMethod::Joint:
        samples = estimate_joint(slice.posts, params.joint_b_kw, params.joint_b_post,
                                 params.joint_sims, cell_stream, def)
                      .samples;
        break;
      case EstimatorMethod::Baseline:
        throw std::runtime_error("--export-dist needs a simulated method");
    }
    export_distribution(samples, max_points, RandomStream(params.seed).substream("export-dist"),
                        export_dist);
  }

  return run.any_cell_failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mis/disinformation prevalence estimation with sampling, annotation, retrieval and joint uncertainty"};
  app.require_subcommand(1);

  std::string input;
  std::string unit_name = "language";
  std::string unit_key;
  std::vector<std::string> method_names = {"baseline"};
  std::string definition_name = "restricted";
  std::string format_name = "json";
  std::string out_path = "-";
  std::string export_dist;
  std::uint64_t max_points = 1000;
  EstimationParams params;

  auto* estimate = app.add_subcommand("estimate", "Estimate prevalence per unit and method");
  estimate->add_option("--input", input, "Annotated corpus CSV")->required();
  estimate->add_option("--unit", unit_name, "language|platform|platform-language");
  estimate->add_option("--unit-key", unit_key, "Restrict to a single unit key");
  estimate->add_option("--method", method_names,
                       "baseline|annotation|retrieval|joint (repeat or comma-separate)")
      ->delimiter(',');
  estimate->add_option("--definition", definition_name, "restricted|total");
  estimate->add_option("--alpha", params.alpha, "Two-sided interval level");
  estimate->add_option("--seed", params.seed, "Master seed");
  estimate->add_option("--sims", params.sims, "Annotation simulation runs");
  estimate->add_option("--b-kw", params.b_kw, "Keyword bootstrap replicates");
  estimate->add_option("--b-post", params.b_post, "Post bootstrap replicates");
  estimate->add_option("--joint-sims", params.joint_sims, "Joint annotation runs per resample");
  estimate->add_option("--joint-b-kw", params.joint_b_kw, "Joint keyword replicates");
  estimate->add_option("--joint-b-post", params.joint_b_post, "Joint post replicates");
  estimate->add_option("--threads", params.threads, "Worker threads over (unit, method) cells");
  estimate->add_option("--format", format_name, "json|csv|md");
  estimate->add_option("--out", out_path, "Output path, - for stdout");
  estimate->add_option("--export-dist", export_dist, "Dump the raw sample vector (CSV)");
  estimate->add_option("--max-points", max_points, "Subsample size for --export-dist");

  std::string matrices_input;
  std::string matrices_unit = "language";
  std::string matrices_format = "json";
  std::uint64_t matrices_sims = 500;
  std::uint64_t matrices_seed = 0;
  auto* matrices =
      app.add_subcommand("matrices", "Per-unit reference and mean correction matrices");
  matrices->add_option("--input", matrices_input, "Annotated corpus CSV")->required();
  matrices->add_option("--unit", matrices_unit, "language|platform|platform-language");
  matrices->add_option("--sims", matrices_sims, "Simulation runs for correction bands");
  matrices->add_option("--seed", matrices_seed, "Master seed");
  matrices->add_option("--format", matrices_format, "json|md");

  auto* validate = app.add_subcommand("validate", "Synthetic-truth validation experiments");
  validate->require_subcommand(1);

  std::string coverage_spec;
  std::uint64_t coverage_trials = 500;
  std::string coverage_method = "baseline";
  std::uint64_t coverage_seed = 0;
  std::string coverage_definition = "restricted";
  auto* coverage = validate->add_subcommand("coverage", "Empirical interval coverage");
  coverage->add_option("--spec", coverage_spec, "SynthSpec JSON file")->required();
  coverage->add_option("--trials", coverage_trials, "Number of synthetic corpora");
  coverage->add_option("--method", coverage_method, "baseline|annotation|retrieval|joint");
  coverage->add_option("--definition", coverage_definition, "restricted|total");
  coverage->add_option("--seed", coverage_seed, "Master seed");

  std::string oracle_spec;
  std::uint64_t oracle_runs = 100000;
  std::uint64_t oracle_seed = 0;
  auto* oracle = validate->add_subcommand("oracle", "Exact-enumeration oracle checks");
  oracle->add_option("--spec", oracle_spec, "SynthSpec JSON file")->required();
  oracle->add_option("--runs", oracle_runs, "Simulation runs per fixture");
  oracle->add_option("--seed", oracle_seed, "Master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) {
      return run_estimate(input, unit_name, unit_key, method_names, definition_name, params,
                          format_name, out_path, export_dist, max_points);
    }

    if (matrices->parsed()) {
      const Corpus corpus = load_corpus(matrices_input);
      const auto units = enumerate_units(corpus, parse_unit_kind(matrices_unit));
      const auto text =
          matrices_format == "md"
              ? render_matrices_markdown(corpus, units, matrices_sims, matrices_seed,
                                         PrevalenceDefinition::Restricted)
              : render_matrices_json(corpus, units, matrices_sims, matrices_seed,
                                     PrevalenceDefinition::Restricted);
      std::fwrite(text.data(), 1, text.size(), stdout);
      return 0;
    }

    if (coverage->parsed()) {
      const SynthSpec spec = SynthSpec::from_json_file(coverage_spec);
      CoverageParams cov_params;
      cov_params.def = parse_definition(coverage_definition);
      const CoverageReport report =
          coverage_experiment(spec, coverage_trials, parse_method(coverage_method),
                              RandomStream(coverage_seed), cov_params);
      nlohmann::json j;
      j["trials"] = report.trials;
      j["covered"] = report.covered;
      j["coverage"] = report.coverage;
      j["coverage_ci_low"] = report.coverage_ci.lower;
      j["coverage_ci_high"] = report.coverage_ci.upper;
      j["true_prevalence"] = report.true_prevalence;
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (oracle->parsed()) {
      const SynthSpec spec = SynthSpec::from_json_file(oracle_spec);
      // small fixture within enumeration bounds, drawn from the spec's matrices
      GroupedCounts n_remainder{3, 5, 4};
      GroupedCounts n_double{2, 6, 2};
      ReferenceMatrix matrix;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) matrix.probs[i][j] = spec.junior_confusion[i][j];
      }
      const auto exact = enumerate_multinomial_exact(n_remainder, matrix,
                                                     PrevalenceDefinition::Restricted, n_double);
      RandomStream stream = RandomStream(oracle_seed).substream("oracle");
      double sum = 0.0;
      std::uint64_t defined = 0;
      for (std::uint64_t run = 0; run < oracle_runs; ++run) {
        RandomStream run_stream = stream.substream("run", run);
        const auto draw = draw_corrected_counts(run_stream, n_double, n_remainder, matrix);
        if (const auto p = compute_prevalence(draw.corrected, PrevalenceDefinition::Restricted)) {
          sum += *p;
          ++defined;
        }
      }
      const double empirical_mean = defined > 0 ? sum / static_cast<double>(defined) : 0.0;
      const double exact_mean = exact.mean();
      const double se = std::sqrt(exact.variance() / static_cast<double>(std::max<std::uint64_t>(defined, 1)));
      const bool pass = std::abs(empirical_mean - exact_mean) <= 4.0 * se + 1e-12;
      nlohmann::json j;
      j["exact_mean"] = exact_mean;
      j["empirical_mean"] = empirical_mean;
      j["runs"] = oracle_runs;
      j["pass"] = pass;
      std::cout << j.dump(2) << "\n";
      return pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
