#include "prevalence/annotation.hpp"

#include <algorithm>
#include <cmath>

namespace prevalence {

ReferenceMatrix ReferenceMatrix::identity() {
  ReferenceMatrix m;
  for (int i = 0; i < 3; ++i) {
    m.probs[i][i] = 1.0;
    m.fallback_rows.push_back(i);
  }
  return m;
}

bool ReferenceMatrix::is_identity() const {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (probs[i][j] != (i == j ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

ReferenceMatrix build_reference_matrix(std::span<const AnnotatedPost> double_coded) {
  ReferenceMatrix m;
  bool any = false;
  for (const auto& post : double_coded) {
    if (!post.agreed_label.has_value()) continue;
    const int row = static_cast<int>(group_label(post.junior_label));
    const int col = static_cast<int>(group_label(*post.agreed_label));
    ++m.support[row][col];
    any = true;
  }
  if (!any) return ReferenceMatrix::identity();

  for (int i = 0; i < 3; ++i) {
    const std::uint64_t row_total = m.support[i][0] + m.support[i][1] + m.support[i][2];
    if (row_total == 0) {
      m.probs[i][i] = 1.0;
      m.fallback_rows.push_back(i);
      continue;
    }
    for (int j = 0; j < 3; ++j) {
      m.probs[i][j] = static_cast<double>(m.support[i][j]) / static_cast<double>(row_total);
    }
  }
  return m;
}

namespace {

// One 3-category multinomial row draw against a precomputed CDF.
inline void draw_row(RandomStream& stream, std::uint64_t trials, double cdf0, double cdf1,
                     std::uint64_t out[3]) {
  for (std::uint64_t t = 0; t < trials; ++t) {
    const double u = stream.next_double();
    if (u < cdf0) {
      ++out[0];
    } else if (u < cdf1) {
      ++out[1];
    } else {
      ++out[2];
    }
  }
}

}  // namespace

CorrectedDraw draw_corrected_counts(RandomStream& stream, const GroupedCounts& n_double,
                                    const GroupedCounts& n_remainder,
                                    const ReferenceMatrix& matrix) {
  CorrectedDraw draw;
  const std::uint64_t row_trials[3] = {n_remainder.n_mis, n_remainder.n_legit,
                                       n_remainder.n_rest};
  for (int i = 0; i < 3; ++i) {
    const double cdf0 = matrix.probs[i][0];
    const double cdf1 = matrix.probs[i][0] + matrix.probs[i][1];
    draw_row(stream, row_trials[i], cdf0, cdf1, draw.table[i].data());
  }
  draw.corrected.n_mis = n_double.n_mis + draw.table[0][0] + draw.table[1][0] + draw.table[2][0];
  draw.corrected.n_legit =
      n_double.n_legit + draw.table[0][1] + draw.table[1][1] + draw.table[2][1];
  draw.corrected.n_rest = n_double.n_rest + draw.table[0][2] + draw.table[1][2] + draw.table[2][2];
  return draw;
}

AnnotationSimResult simulate_annotation(std::span<const AnnotatedPost> unit_posts,
                                        const ReferenceMatrix& matrix, std::uint64_t s,
                                        RandomStream stream, PrevalenceDefinition def) {
  AnnotationSimResult result;
  result.s = s;

  for (const auto& post : unit_posts) {
    if (post.double_coded()) {
      result.n_double_coded.add(group_label(*post.agreed_label));
    } else {
      result.n_junior_only.add(group_label(post.junior_label));
    }
  }

  result.samples.reserve(s);
  std::array<std::array<std::vector<double>, 3>, 3> cell_samples;
  for (auto& row : cell_samples) {
    for (auto& cell : row) cell.reserve(s);
  }

  for (std::uint64_t run = 0; run < s; ++run) {
    RandomStream run_stream = stream.substream("sim", run);
    const CorrectedDraw draw =
        draw_corrected_counts(run_stream, result.n_double_coded, result.n_junior_only, matrix);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        cell_samples[i][j].push_back(static_cast<double>(draw.table[i][j]));
      }
    }
    if (const auto p = compute_prevalence(draw.corrected, def)) {
      result.samples.push_back(*p);
    } else {
      ++result.n_undefined;
    }
  }

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto cell = percentile_summary(cell_samples[i][j]);
      result.mean_correction[i][j] = {cell.mean, cell.p2_5, cell.p97_5};
    }
  }
  if (!result.samples.empty()) {
    result.summary = percentile_summary(result.samples);
  }
  return result;
}

}  // namespace prevalence
