#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "prevalence/corpus_model.hpp"
#include "prevalence/stats_kernel.hpp"

namespace prevalence {

// Row-stochastic junior -> agreed transition matrix over the three label
// groups, estimated from a double-coded subset. Rows with zero support fall
// back to the identity row and are recorded.
struct ReferenceMatrix {
  std::array<std::array<double, 3>, 3> probs{};
  std::array<std::array<std::uint64_t, 3>, 3> support{};
  std::vector<int> fallback_rows;

  static ReferenceMatrix identity();
  bool is_identity() const;
};

// Builds the matrix from posts carrying agreed labels; posts without an
// agreed label are ignored. Returns identity() with all three fallback rows
// when no double-coded posts exist (callers should surface a warning).
ReferenceMatrix build_reference_matrix(std::span<const AnnotatedPost> double_coded);

struct CellSummary {
  double mean = 0.0;
  double p2_5 = 0.0;
  double p97_5 = 0.0;
};

struct AnnotationSimResult {
  std::vector<double> samples;
  PercentileSummary summary{};
  std::array<std::array<CellSummary, 3>, 3> mean_correction{};
  std::uint64_t s = 0;
  std::uint64_t n_undefined = 0;
  GroupedCounts n_double_coded{};  // agreed-label groups over D
  GroupedCounts n_junior_only{};   // junior-label groups over R
};

// Multinomial simulation of annotation error (S runs): draws a transition
// table for the junior-only remainder row-wise from the reference matrix,
// combines column sums with the double-coded agreed counts, and records the
// prevalence of each run.
AnnotationSimResult simulate_annotation(std::span<const AnnotatedPost> unit_posts,
                                        const ReferenceMatrix& matrix, std::uint64_t s,
                                        RandomStream stream, PrevalenceDefinition def);

// Same simulation driven directly by grouped counts; the post-based overload
// and the joint estimator both reduce to this.
struct CorrectedDraw {
  GroupedCounts corrected{};
  std::array<std::array<std::uint64_t, 3>, 3> table{};
};

CorrectedDraw draw_corrected_counts(RandomStream& stream, const GroupedCounts& n_double,
                                    const GroupedCounts& n_remainder,
                                    const ReferenceMatrix& matrix);

}  // namespace prevalence
