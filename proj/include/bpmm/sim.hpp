#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpmm/schedulers.hpp"
#include "bpmm/traffic.hpp"

namespace bpmm {

struct SimConfig {
  std::uint64_t frames = 200000;
  SchedulerKind scheduler = SchedulerKind::ExactMBP;
  SchedulerConfig scheduler_cfg;
  double v_factor = 10.0;           // V = v_factor * C_max^2 unless `v` is set
  std::optional<double> v;
  ArrivalMode arrival_mode = ArrivalMode::Fluid;
  std::uint64_t seed = 0;
  std::uint64_t record_interval = 100;

  void validate() const;
};

/// Raised when a scheduler emits an infeasible schedule.
class AuditError : public std::runtime_error {
 public:
  AuditError(std::uint64_t frame, std::vector<std::string> issues);
  std::uint64_t frame() const { return frame_; }
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::uint64_t frame_;
  std::vector<std::string> issues_;
};

/// Histogram key: role vector plus the links with p > 1e-9, or "idle" for
/// the all-zero schedule.
std::string schedule_key(const Schedule& sch, const Topology& topo);
std::uint64_t key_hash(const std::string& key);

/// Smallest number of distinct schedules whose counts reach 95% of frames.
std::size_t coverage95(std::vector<std::uint64_t> counts);

struct UtilityReport {
  double value = 0.0;  // -inf when some flow has zero rate
  std::vector<int> starved_flows;
};

/// sum_f 0.5 ln(x_f).
UtilityReport utility(const std::vector<double>& rates);

/// Least-squares slope of y against x.
double linear_slope(const std::vector<double>& x, const std::vector<double>& y);

struct FrameRecord {
  std::uint64_t frame = 0;
  double sum_queue = 0.0;
  const std::vector<double>* delivered = nullptr;  // per flow, this frame
  std::uint64_t key_hash = 0;
  const QueueMatrix* queues = nullptr;              // after the update
  const Schedule* schedule = nullptr;
};

struct SummaryMetrics {
  std::string scheduler;
  std::uint64_t frames = 0;
  double v = 0.0;
  double c_max = 0.0;
  std::vector<double> flow_rates;  // delivered bits per frame, per flow
  double sum_rate = 0.0;
  UtilityReport utility;
  std::map<std::string, std::uint64_t> histogram;
  std::size_t coverage95 = 0;
  double final_max_queue = 0.0;
  double injected_total = 0.0;
  double delivered_total = 0.0;
  double final_queue_total = 0.0;
  std::vector<std::uint64_t> sample_frames;  // every record_interval frames
  std::vector<double> sample_max_queue;
  std::vector<std::vector<double>> sample_rates;  // running per-flow rate estimate
  SchedulerStats scheduler_stats;
  double mean_weight = 0.0;
  double elapsed_seconds = 0.0;
};

using FrameObserver = std::function<void(const FrameRecord&)>;

/// Runs the frame loop: congestion control, arrivals, schedule on the
/// pre-arrival queues, rate assignment, queue update.
SummaryMetrics run(const Topology& topo, const SimConfig& cfg, const FrameObserver& observer = {});

}  // namespace bpmm
