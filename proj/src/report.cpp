#include "prevalence/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "prevalence/annotation.hpp"
#include "prevalence/joint.hpp"
#include "prevalence/retrieval.hpp"

namespace prevalence {

namespace {

std::optional<double> rounded(const std::optional<double>& v) {
  if (!v) return std::nullopt;
  return round_pct_1dp(*v);
}

std::string format_1dp(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << v;
  return out.str();
}

EstimateReport estimate_cell(const Corpus& corpus, const AnalysisUnit& unit,
                             EstimatorMethod method, PrevalenceDefinition def,
                             const EstimationParams& params) {
  EstimateReport report;
  report.unit_type = unit.kind_name();
  report.unit_key = unit.key();
  report.method = to_string(method);
  report.definition = def;
  report.provenance = corpus.provenance;

  const UnitSlice slice = slice_by_unit(corpus, unit);
  report.n_posts = slice.posts.size();
  for (const auto& post : slice.posts) {
    if (post.double_coded()) ++report.n_double_coded;
  }
  if (slice.empty_warning) {
    report.warnings.push_back("empty_slice");
    return report;
  }

  // cell streams keyed by (unit, method) so results are independent of the
  // unit enumeration order and the worker count
  RandomStream cell_stream =
      RandomStream(params.seed).substream(report.unit_key).substream(report.method);
  const double z = normal_quantile_two_sided(params.alpha);

  switch (method) {
    case EstimatorMethod::Baseline: {
      GroupedCounts counts;
      for (const auto& post : slice.posts) counts.add(group_label(effective_label(post)));
      const std::uint64_t denom =
          def == PrevalenceDefinition::Restricted ? counts.n_mis + counts.n_legit : counts.total();
      if (denom == 0) {
        report.warnings.push_back("undefined_prevalence");
        break;
      }
      const WilsonInterval ci = wilson_interval(counts.n_mis, denom, z);
      report.point_pct_raw = ci.p_hat * 100.0;
      report.ci_low_pct_raw = ci.lower * 100.0;
      report.ci_high_pct_raw = ci.upper * 100.0;
      break;
    }
    case EstimatorMethod::Annotation: {
      if (report.n_double_coded == 0) report.warnings.push_back("identity_fallback");
      const ReferenceMatrix matrix = build_reference_matrix(slice.posts);
      if (!matrix.fallback_rows.empty() && report.n_double_coded > 0) {
        report.warnings.push_back("matrix_fallback_rows");
      }
      const AnnotationSimResult sim =
          simulate_annotation(slice.posts, matrix, params.sims, cell_stream, def);
      report.n_replicates = sim.samples.size();
      report.n_undefined = sim.n_undefined;
      if (sim.samples.empty()) {
        report.warnings.push_back("undefined_prevalence");
        break;
      }
      report.point_pct_raw = sim.summary.mean * 100.0;
      report.ci_low_pct_raw = sim.summary.p2_5 * 100.0;
      report.ci_high_pct_raw = sim.summary.p97_5 * 100.0;
      report.median_pct_raw = sim.summary.median * 100.0;
      break;
    }
    case EstimatorMethod::Retrieval: {
      const KeywordPool pool = keyword_pool(slice.posts);
      const BootstrapResult boot =
          bootstrap_retrieval(pool, params.b_kw, params.b_post, cell_stream, def);
      report.n_replicates = boot.samples.size();
      report.n_undefined = boot.n_undefined;
      if (boot.n_exhausted_retries > 0) report.warnings.push_back("exhausted_retries");
      if (boot.samples.empty()) {
        report.warnings.push_back("undefined_prevalence");
        break;
      }
      report.point_pct_raw = boot.summary.mean * 100.0;
      report.ci_low_pct_raw = boot.summary.p2_5 * 100.0;
      report.ci_high_pct_raw = boot.summary.p97_5 * 100.0;
      report.median_pct_raw = boot.summary.median * 100.0;
      break;
    }
    case EstimatorMethod::Joint: {
      const JointResult joint = estimate_joint(slice.posts, params.joint_b_kw,
                                               params.joint_b_post, params.joint_sims,
                                               cell_stream, def);
      report.n_replicates = joint.samples.size();
      report.n_undefined = joint.n_undefined;
      if (joint.identity_fallback) report.warnings.push_back("identity_fallback");
      if (joint.samples.empty()) {
        report.warnings.push_back("undefined_prevalence");
        break;
      }
      report.point_pct_raw = joint.summary.mean * 100.0;
      report.ci_low_pct_raw = joint.summary.p2_5 * 100.0;
      report.ci_high_pct_raw = joint.summary.p97_5 * 100.0;
      report.median_pct_raw = joint.summary.median * 100.0;
      break;
    }
  }
  return report;
}

nlohmann::json to_json(const EstimateReport& r, const EstimationParams& params) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    if (!v) return nullptr;
    return *v;
  };
  nlohmann::json j;
  j["unit_type"] = r.unit_type;
  j["unit_key"] = r.unit_key;
  j["method"] = r.method;
  j["definition"] = to_string(r.definition);
  j["n_posts"] = r.n_posts;
  j["n_double_coded"] = r.n_double_coded;
  j["point_pct"] = opt(r.point_pct());
  j["ci_low_pct"] = opt(r.ci_low_pct());
  j["ci_high_pct"] = opt(r.ci_high_pct());
  j["point_pct_raw"] = opt(r.point_pct_raw);
  j["ci_low_pct_raw"] = opt(r.ci_low_pct_raw);
  j["ci_high_pct_raw"] = opt(r.ci_high_pct_raw);
  j["median_pct_raw"] = opt(r.median_pct_raw);
  j["n_replicates"] = r.n_replicates;
  j["n_undefined"] = r.n_undefined;
  j["warnings"] = r.warnings;
  j["params"] = {{"alpha", params.alpha},
                 {"sims", params.sims},
                 {"b_kw", params.b_kw},
                 {"b_post", params.b_post},
                 {"joint_b_kw", params.joint_b_kw},
                 {"joint_b_post", params.joint_b_post},
                 {"joint_sims", params.joint_sims},
                 {"seed", params.seed}};
  j["provenance"] = {{"source", r.provenance.source},
                     {"rows_read", r.provenance.rows_read},
                     {"dropped_r1", r.provenance.dropped_r1},
                     {"dropped_r2", r.provenance.dropped_r2}};
  return j;
}

constexpr EstimatorMethod kMethodOrder[] = {EstimatorMethod::Baseline, EstimatorMethod::Annotation,
                                            EstimatorMethod::Retrieval, EstimatorMethod::Joint};

const char* method_column_name(const std::string& method) {
  if (method == "baseline") return "Baseline (Wilson)";
  if (method == "annotation") return "Annot. Uncert.";
  if (method == "retrieval") return "Retr. Uncert.";
  return "Joint Uncert.";
}

}  // namespace

std::optional<double> EstimateReport::point_pct() const { return rounded(point_pct_raw); }
std::optional<double> EstimateReport::ci_low_pct() const { return rounded(ci_low_pct_raw); }
std::optional<double> EstimateReport::ci_high_pct() const { return rounded(ci_high_pct_raw); }

EstimationRun run_estimation(const Corpus& corpus, const std::vector<AnalysisUnit>& units,
                             const std::vector<EstimatorMethod>& methods,
                             PrevalenceDefinition def, const EstimationParams& params) {
  std::vector<AnalysisUnit> sorted_units(units);
  std::sort(sorted_units.begin(), sorted_units.end(),
            [](const AnalysisUnit& a, const AnalysisUnit& b) { return a.key() < b.key(); });

  std::vector<EstimatorMethod> ordered_methods;
  for (EstimatorMethod m : kMethodOrder) {
    if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
      ordered_methods.push_back(m);
    }
  }

  struct Cell {
    AnalysisUnit unit;
    EstimatorMethod method;
  };
  std::vector<Cell> cells;
  for (const auto& unit : sorted_units) {
    for (const auto method : ordered_methods) cells.push_back({unit, method});
  }

  EstimationRun run;
  run.params = params;
  run.reports.resize(cells.size());

  std::atomic<bool> any_failed{false};
  const unsigned n_threads = std::max(1u, params.threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        run.reports[i] = estimate_cell(corpus, cells[i].unit, cells[i].method, def, params);
      } catch (const std::exception& e) {
        EstimateReport failed;
        failed.unit_type = cells[i].unit.kind_name();
        failed.unit_key = cells[i].unit.key();
        failed.method = to_string(cells[i].method);
        failed.definition = def;
        failed.provenance = corpus.provenance;
        failed.warnings.push_back(std::string("cell_failed: ") + e.what());
        run.reports[i] = std::move(failed);
        any_failed = true;
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (const auto& report : run.reports) {
    for (const auto& warning : report.warnings) {
      if (warning.rfind("cell_failed", 0) == 0) any_failed = true;
    }
  }
  run.any_cell_failed = any_failed;
  return run;
}

std::string render_reports(const EstimationRun& run, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& report : run.reports) arr.push_back(to_json(report, run.params));
      return arr.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::ostringstream out;
      out << "unit_type,unit_key,method,definition,n_posts,n_double_coded,"
             "point_pct,ci_low_pct,ci_high_pct,point_pct_raw,ci_low_pct_raw,ci_high_pct_raw,"
             "n_replicates,n_undefined,warnings\n";
      for (const auto& r : run.reports) {
        auto cell = [](const std::optional<double>& v, bool render_1dp) {
          if (!v) return std::string();
          if (render_1dp) return format_1dp(*v);
          std::ostringstream s;
          s.precision(17);
          s << *v;
          return s.str();
        };
        std::string warnings;
        for (std::size_t i = 0; i < r.warnings.size(); ++i) {
          if (i > 0) warnings += ';';
          warnings += r.warnings[i];
        }
        out << r.unit_type << ',' << r.unit_key << ',' << r.method << ','
            << to_string(r.definition) << ',' << r.n_posts << ',' << r.n_double_coded << ','
            << cell(r.point_pct(), true) << ',' << cell(r.ci_low_pct(), true) << ','
            << cell(r.ci_high_pct(), true) << ',' << cell(r.point_pct_raw, false) << ','
            << cell(r.ci_low_pct_raw, false) << ',' << cell(r.ci_high_pct_raw, false) << ','
            << r.n_replicates << ',' << r.n_undefined << ",\"" << warnings << "\"\n";
      }
      return out.str();
    }
    case ReportFormat::Markdown: {
      // units as rows, methods as Est./CI column pairs
      std::vector<std::string> unit_keys;
      std::vector<std::string> method_names;
      for (const auto& r : run.reports) {
        if (std::find(unit_keys.begin(), unit_keys.end(), r.unit_key) == unit_keys.end()) {
          unit_keys.push_back(r.unit_key);
        }
        if (std::find(method_names.begin(), method_names.end(), r.method) ==
            method_names.end()) {
          method_names.push_back(r.method);
        }
      }
      auto find_report = [&](const std::string& unit,
                             const std::string& method) -> const EstimateReport* {
        for (const auto& r : run.reports) {
          if (r.unit_key == unit && r.method == method) return &r;
        }
        return nullptr;
      };

      std::ostringstream out;
      out << "| Unit |";
      for (const auto& m : method_names) {
        out << ' ' << method_column_name(m) << " Est. | " << method_column_name(m) << " 95% CI |";
      }
      out << "\n|---|";
      for (std::size_t i = 0; i < method_names.size(); ++i) out << "---|---|";
      out << "\n";
      for (const auto& unit : unit_keys) {
        out << "| " << unit << " |";
        for (const auto& m : method_names) {
          const EstimateReport* r = find_report(unit, m);
          if (r == nullptr || !r->point_pct()) {
            out << " - | - |";
            continue;
          }
          out << ' ' << format_1dp(*r->point_pct()) << " | [" << format_1dp(*r->ci_low_pct())
              << "-" << format_1dp(*r->ci_high_pct()) << "] |";
        }
        out << "\n";
      }
      return out.str();
    }
  }
  return {};
}

void emit_report(const EstimationRun& run, ReportFormat format, const std::string& out_path) {
  const std::string text = render_reports(run, format);
  if (out_path.empty() || out_path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + out_path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + out_path);
}

namespace {

struct UnitMatrices {
  std::string unit_key;
  std::uint64_t n_double_coded = 0;
  ReferenceMatrix matrix;
  AnnotationSimResult sim;
};

std::vector<UnitMatrices> compute_matrices(const Corpus& corpus,
                                           const std::vector<AnalysisUnit>& units,
                                           std::uint64_t s, std::uint64_t seed,
                                           PrevalenceDefinition def) {
  std::vector<UnitMatrices> result;
  for (const auto& unit : units) {
    const UnitSlice slice = slice_by_unit(corpus, unit);
    UnitMatrices um;
    um.unit_key = unit.key();
    for (const auto& post : slice.posts) {
      if (post.double_coded()) ++um.n_double_coded;
    }
    um.matrix = build_reference_matrix(slice.posts);
    RandomStream stream = RandomStream(seed).substream(um.unit_key).substream("matrices");
    um.sim = simulate_annotation(slice.posts, um.matrix, s, stream, def);
    result.push_back(std::move(um));
  }
  return result;
}

}  // namespace

std::string render_matrices_json(const Corpus& corpus, const std::vector<AnalysisUnit>& units,
                                 std::uint64_t s, std::uint64_t seed, PrevalenceDefinition def) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& um : compute_matrices(corpus, units, s, seed, def)) {
    nlohmann::json j;
    j["unit_key"] = um.unit_key;
    j["n_double_coded"] = um.n_double_coded;
    j["reference_matrix"] = um.matrix.probs;
    j["support"] = um.matrix.support;
    j["fallback_rows"] = um.matrix.fallback_rows;
    nlohmann::json correction = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j2 = 0; j2 < 3; ++j2) {
        const auto& cell = um.sim.mean_correction[i][j2];
        row.push_back({{"mean", cell.mean}, {"p2_5", cell.p2_5}, {"p97_5", cell.p97_5}});
      }
      correction.push_back(row);
    }
    j["mean_correction"] = correction;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string render_matrices_markdown(const Corpus& corpus, const std::vector<AnalysisUnit>& units,
                                     std::uint64_t s, std::uint64_t seed,
                                     PrevalenceDefinition def) {
  static const char* kGroups[3] = {"MisDisinfo", "Legit", "AllTheRest"};
  std::ostringstream out;
  for (const auto& um : compute_matrices(corpus, units, s, seed, def)) {
    out << "## " << um.unit_key << " (double-coded: " << um.n_double_coded << ")\n\n";
    out << "Reference matrix (junior rows, agreed columns):\n\n";
    out << "| | MisDisinfo | Legit | AllTheRest |\n|---|---|---|---|\n";
    for (int i = 0; i < 3; ++i) {
      out << "| " << kGroups[i] << " |";
      for (int j = 0; j < 3; ++j) {
        std::ostringstream v;
        v.setf(std::ios::fixed);
        v.precision(3);
        v << um.matrix.probs[i][j];
        out << ' ' << v.str() << " (" << um.matrix.support[i][j] << ") |";
      }
      out << "\n";
    }
    out << "\nMean correction matrix over " << um.sim.s << " runs:\n\n";
    out << "| | MisDisinfo | Legit | AllTheRest |\n|---|---|---|---|\n";
    for (int i = 0; i < 3; ++i) {
      out << "| " << kGroups[i] << " |";
      for (int j = 0; j < 3; ++j) {
        const auto& cell = um.sim.mean_correction[i][j];
        std::ostringstream v;
        v.setf(std::ios::fixed);
        v.precision(1);
        v << cell.mean << " [" << cell.p2_5 << "-" << cell.p97_5 << "]";
        out << ' ' << v.str() << " |";
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

std::string render_distribution(const std::vector<double>& samples, std::uint64_t max_points,
                                RandomStream stream) {
  if (max_points == 0) throw std::invalid_argument("max_points must be positive");
  std::ostringstream out;
  out.precision(17);
  out << "prevalence\n";
  if (samples.size() <= max_points) {
    for (const double v : samples) out << v << "\n";
    return out.str();
  }
  // uniform subsample without replacement: partial Fisher-Yates over indices
  std::vector<std::uint64_t> indices(samples.size());
  for (std::uint64_t i = 0; i < indices.size(); ++i) indices[i] = i;
  for (std::uint64_t i = 0; i < max_points; ++i) {
    const std::uint64_t j = i + stream.uniform_index(indices.size() - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(max_points);
  std::sort(indices.begin(), indices.end());
  for (const std::uint64_t i : indices) out << samples[i] << "\n";
  return out.str();
}

void export_distribution(const std::vector<double>& samples, std::uint64_t max_points,
                         RandomStream stream, const std::string& out_path) {
  const std::string text = render_distribution(samples, max_points, std::move(stream));
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + out_path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + out_path);
}

}  // namespace prevalence
