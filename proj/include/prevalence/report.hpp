#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prevalence/corpus_model.hpp"
#include "prevalence/ingest.hpp"
#include "prevalence/stats_kernel.hpp"
#include "prevalence/validation.hpp"

namespace prevalence {

struct EstimationParams {
  double alpha = 0.05;
  std::uint64_t sims = 500;    // annotation simulation runs
  std::uint64_t b_kw = 500;    // retrieval keyword replicates
  std::uint64_t b_post = 500;  // retrieval post replicates
  std::uint64_t joint_b_kw = 100;
  std::uint64_t joint_b_post = 100;
  std::uint64_t joint_sims = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// One (unit, method, definition) cell of the output tables.
struct EstimateReport {
  std::string unit_type;
  std::string unit_key;
  std::string method;
  PrevalenceDefinition definition{};
  std::uint64_t n_posts = 0;
  std::uint64_t n_double_coded = 0;

  // percentages; raw values unrounded, *_pct rendered round-half-to-even at 1dp
  std::optional<double> point_pct_raw;
  std::optional<double> ci_low_pct_raw;
  std::optional<double> ci_high_pct_raw;
  std::optional<double> median_pct_raw;

  std::uint64_t n_replicates = 0;
  std::uint64_t n_undefined = 0;
  std::vector<std::string> warnings;
  Provenance provenance;

  std::optional<double> point_pct() const;
  std::optional<double> ci_low_pct() const;
  std::optional<double> ci_high_pct() const;
};

struct EstimationRun {
  std::vector<EstimateReport> reports;
  EstimationParams params;
  bool any_cell_failed = false;
};

// One report per (unit, method) cell; cells are independent and may execute
// on params.threads workers, with identical output for any worker count.
EstimationRun run_estimation(const Corpus& corpus, const std::vector<AnalysisUnit>& units,
                             const std::vector<EstimatorMethod>& methods,
                             PrevalenceDefinition def, const EstimationParams& params);

enum class ReportFormat { Json, Csv, Markdown };

std::string render_reports(const EstimationRun& run, ReportFormat format);
void emit_report(const EstimationRun& run, ReportFormat format, const std::string& out_path);

// Per-unit reference matrices and mean correction matrices.
std::string render_matrices_json(const Corpus& corpus, const std::vector<AnalysisUnit>& units,
                                 std::uint64_t s, std::uint64_t seed, PrevalenceDefinition def);
std::string render_matrices_markdown(const Corpus& corpus, const std::vector<AnalysisUnit>& units,
                                     std::uint64_t s, std::uint64_t seed,
                                     PrevalenceDefinition def);

// Raw or uniformly subsampled (without replacement) sample dump, one value
// per line, for external violin/box plotting.
void export_distribution(const std::vector<double>& samples, std::uint64_t max_points,
                         RandomStream stream, const std::string& out_path);

std::string render_distribution(const std::vector<double>& samples, std::uint64_t max_points,
                                RandomStream stream);

}  // namespace prevalence
