#include "hec/sim/metrics.hpp"

namespace hec::sim {

Metrics compute_metrics(const std::vector<WindowRecord>& records) {
  if (records.empty()) throw DataError("no records to aggregate");
  Metrics m;
  double delay_sum = 0.0;
  double reward_sum = 0.0;
  bool all_have_reward = true;
  long correct = 0;
  for (const auto& r : records) {
    if (r.verdict && r.truth) ++m.tp;
    if (r.verdict && !r.truth) ++m.fp;
    if (!r.verdict && r.truth) ++m.fn;
    if (!r.verdict && !r.truth) ++m.tn;
    if (r.correct()) ++correct;
    delay_sum += r.delay_ms;
    if (r.reward) {
      reward_sum += *r.reward;
    } else {
      all_have_reward = false;
    }
  }
  const double n = static_cast<double>(records.size());
  m.accuracy_pct = 100.0 * correct / n;
  m.mean_delay_ms = delay_sum / n;
  if (all_have_reward) m.mean_reward = reward_sum / n;

  if (m.tp + m.fp == 0 || m.tp + m.fn == 0) {
    m.f1 = 0.0;
    m.f1_degenerate = true;
  } else {
    const double precision = static_cast<double>(m.tp) / (m.tp + m.fp);
    const double recall = static_cast<double>(m.tp) / (m.tp + m.fn);
    if (precision + recall == 0.0) {
      m.f1 = 0.0;
      m.f1_degenerate = true;
    } else {
      m.f1 = 2.0 * precision * recall / (precision + recall);
    }
  }
  return m;
}

}  // namespace hec::sim
