#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fcmdp/deployer.hpp"

namespace fcmdp {

enum class FailureLabel { kSuccess, kIsFailure, kEncoderFailure, kIrFailure, kTimeout };

const char* failure_label_name(FailureLabel label);

/// Per-stage success conditioned on the stage being reached, so earlier
/// stages' failures do not accumulate into later rates.
struct StageStats {
  int n_stages = 0;
  std::vector<int> reached;
  std::vector<int> succeeded;
  int episodes = 0;
  int successes = 0;

  /// succeeded/reached; empty when the stage was never reached.
  std::optional<double> rate(int stage) const;
  double overall() const;
};

StageStats stage_stats(const std::vector<EpisodeTrace>& traces);

/// A.9-style attribution, checked in order on the first failed stage:
/// no cue-exposing observation -> IsFailure; cue seen but the context used at
/// the last pre-action gate was wrong -> EncoderFailure; context right but the
/// action wrong -> IrFailure; cue seen yet no IR action attempted -> Timeout.
FailureLabel classify_failure(const EpisodeTrace& trace);

struct ResultRow {
  std::string method;
  std::string task;
  std::uint64_t seed = 0;
  int episode = 0;
  int stage = 0;
  bool reached = false;
  bool succeeded = false;
  FailureLabel label = FailureLabel::kSuccess;
  int steps = 0;
  int switches = 0;
  double noise_scale = 0.0;
};

std::vector<ResultRow> result_rows(const std::vector<EpisodeTrace>& traces,
                                   const std::string& method, double noise_scale);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows,
                       bool header = true);
void write_stage_stats_csv(std::ostream& os, const std::string& method,
                           const std::string& task, const StageStats& stats);

/// Line-delimited step records for replay and uncertainty-over-time plots.
void write_trace_file(std::ostream& os, const std::vector<EpisodeTrace>& traces);

struct NoiseSweepRow {
  double scale = 0.0;
  int episodes = 0;
  double success_rate = 0.0;
  std::array<int, 5> label_counts{};  // indexed by FailureLabel

  double label_share(FailureLabel label) const;
};

void write_sweep_csv(std::ostream& os, const std::string& method,
                     const std::string& task, const std::vector<NoiseSweepRow>& rows);

}  // namespace fcmdp
