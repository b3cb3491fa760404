#include "fcmdp/eval.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fcmdp {

const char* failure_label_name(FailureLabel label) {
  switch (label) {
    case FailureLabel::kSuccess: return "success";
    case FailureLabel::kIsFailure: return "is_failure";
    case FailureLabel::kEncoderFailure: return "encoder_failure";
    case FailureLabel::kIrFailure: return "ir_failure";
    case FailureLabel::kTimeout: return "timeout";
  }
  return "?";
}

std::optional<double> StageStats::rate(int stage) const {
  if (reached.at(stage) == 0) return std::nullopt;
  return static_cast<double>(succeeded[stage]) / reached[stage];
}

double StageStats::overall() const {
  return episodes == 0 ? 0.0 : static_cast<double>(successes) / episodes;
}

StageStats stage_stats(const std::vector<EpisodeTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("stage_stats: no traces");
  StageStats st;
  st.n_stages = traces.front().n_stages;
  st.reached.assign(st.n_stages, 0);
  st.succeeded.assign(st.n_stages, 0);
  for (const EpisodeTrace& tr : traces) {
    if (tr.n_stages != st.n_stages)
      throw std::invalid_argument("stage_stats: traces from different tasks");
    ++st.episodes;
    st.successes += tr.success();
    for (int s = 0; s < st.n_stages; ++s) {
      st.reached[s] += tr.stage_reached[s];
      st.succeeded[s] += tr.stage_succeeded[s];
    }
  }
  return st;
}

FailureLabel classify_failure(const EpisodeTrace& trace) {
  if (trace.success()) return FailureLabel::kSuccess;
  int k = -1;
  for (int s = 0; s < trace.n_stages; ++s)
    if (trace.stage_reached[s] && !trace.stage_succeeded[s]) {
      k = s;
      break;
    }
  if (k < 0) throw std::invalid_argument("classify_failure: malformed trace");
  if (!trace.cue_exposed[k]) return FailureLabel::kIsFailure;
  if (!trace.ir_attempted[k]) return FailureLabel::kTimeout;
  if (trace.last_ir_ctx_value[k] != trace.gt_values[k])
    return FailureLabel::kEncoderFailure;
  return FailureLabel::kIrFailure;
}

std::vector<ResultRow> result_rows(const std::vector<EpisodeTrace>& traces,
                                   const std::string& method, double noise_scale) {
  std::vector<ResultRow> rows;
  for (const EpisodeTrace& tr : traces) {
    FailureLabel label = classify_failure(tr);
    for (int s = 0; s < tr.n_stages; ++s) {
      ResultRow row;
      row.method = method;
      row.task = tr.task;
      row.seed = tr.seed;
      row.episode = tr.episode_index;
      row.stage = s;
      row.reached = tr.stage_reached[s];
      row.succeeded = tr.stage_succeeded[s];
      row.label = label;
      row.steps = static_cast<int>(tr.steps.size());
      row.switches = static_cast<int>(tr.switches.size());
      row.noise_scale = noise_scale;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows,
                       bool header) {
  if (header)
    os << "method,task,seed,episode,stage,reached,succeeded,failure_label,steps,"
          "switches,noise_scale\n";
  for (const ResultRow& r : rows) {
    os << r.method << ',' << r.task << ',' << r.seed << ',' << r.episode << ','
       << r.stage << ',' << (r.reached ? 1 : 0) << ',' << (r.succeeded ? 1 : 0) << ','
       << failure_label_name(r.label) << ',' << r.steps << ',' << r.switches << ','
       << r.noise_scale << '\n';
  }
}

void write_stage_stats_csv(std::ostream& os, const std::string& method,
                           const std::string& task, const StageStats& stats) {
  os << "method,task,stage,reached,succeeded,rate\n";
  for (int s = 0; s < stats.n_stages; ++s) {
    os << method << ',' << task << ',' << s << ',' << stats.reached[s] << ','
       << stats.succeeded[s] << ',';
    auto r = stats.rate(s);
    if (r)
      os << *r;
    else
      os << "null";
    os << '\n';
  }
  os << method << ',' << task << ",overall," << stats.episodes << ','
     << stats.successes << ',' << stats.overall() << '\n';
}

void write_trace_file(std::ostream& os, const std::vector<EpisodeTrace>& traces) {
  os << "episode,t,agent,action,uncertainty,stage_before,reward,done\n";
  for (const EpisodeTrace& tr : traces) {
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      const StepRecord& s = tr.steps[i];
      os << tr.episode_index << ',' << s.t << ','
         << (s.agent == AgentKind::kIs ? "IS" : "IR") << ',' << s.action << ',';
      double u = tr.uncertainties[i];
      if (std::isnan(u))
        os << "nan";
      else
        os << u;
      os << ',' << s.stage_before << ',' << s.reward << ',' << (s.done ? 1 : 0)
         << '\n';
    }
  }
}

double NoiseSweepRow::label_share(FailureLabel label) const {
  int total = 0;
  for (int c : label_counts) total += c;
  if (total == 0) return 0.0;
  return static_cast<double>(label_counts[static_cast<int>(label)]) / total;
}

void write_sweep_csv(std::ostream& os, const std::string& method,
                     const std::string& task, const std::vector<NoiseSweepRow>& rows) {
  os << "method,task,noise_scale,episodes,success_rate,success,is_failure,"
        "encoder_failure,ir_failure,timeout\n";
  for (const NoiseSweepRow& r : rows) {
    os << method << ',' << task << ',' << r.scale << ',' << r.episodes << ','
       << r.success_rate;
    for (int c : r.label_counts) os << ',' << c;
    os << '\n';
  }
}

}  // namespace fcmdp
