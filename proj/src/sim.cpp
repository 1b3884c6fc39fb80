#include "bpmm/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace bpmm {

void SimConfig::validate() const {
  if (frames < 1) throw std::invalid_argument("frames must be at least 1");
  if (record_interval < 1) throw std::invalid_argument("record interval must be at least 1");
  if (v && !(*v > 0.0)) throw std::invalid_argument("V must be positive");
  if (!(v_factor > 0.0)) throw std::invalid_argument("V factor must be positive");
}

AuditError::AuditError(std::uint64_t frame, std::vector<std::string> issues)
    : std::runtime_error("infeasible schedule at frame " + std::to_string(frame) +
                         (issues.empty() ? std::string() : ": " + issues.front())),
      frame_(frame),
      issues_(std::move(issues)) {}

std::string schedule_key(const Schedule& sch, const Topology& topo) {
  std::string links;
  for (const DirectedLink& l : topo.links()) {
    if (sch.power[static_cast<std::size_t>(l.id)] > 1e-9) {
      if (!links.empty()) links += ',';
      links += std::to_string(l.tx) + '>' + std::to_string(l.rx);
    }
  }
  if (sch.roles == 0 && links.empty()) return "idle";
  std::string roles(static_cast<std::size_t>(topo.num_nodes()), '0');
  for (int n = 0; n < topo.num_nodes(); ++n)
    if (sch.transmits(n)) roles[static_cast<std::size_t>(n)] = '1';
  return roles + '|' + links;
}

std::uint64_t key_hash(const std::string& key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t coverage95(std::vector<std::uint64_t> counts) {
  std::sort(counts.begin(), counts.end(), std::greater<>());
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (total <= 0.0) return 0;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    cumulative += static_cast<double>(counts[k]);
    if (cumulative >= 0.95 * total) return k + 1;
  }
  return counts.size();
}

UtilityReport utility(const std::vector<double>& rates) {
  UtilityReport r;
  for (std::size_t f = 0; f < rates.size(); ++f) {
    if (rates[f] < 0.0) throw std::invalid_argument("rates must be nonnegative");
    if (rates[f] == 0.0) {
      r.starved_flows.push_back(static_cast<int>(f));
    } else {
      r.value += 0.5 * std::log(rates[f]);
    }
  }
  if (!r.starved_flows.empty()) r.value = -std::numeric_limits<double>::infinity();
  return r;
}

double linear_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

SummaryMetrics run(const Topology& topo, const SimConfig& cfg, const FrameObserver& observer) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  CcParams cc = CcParams::for_topology(topo, cfg.v_factor);
  if (cfg.v) cc.v = *cfg.v;
  if (cc.c_max <= 0.0) cc.v = std::max(cc.v, 1.0);  // no links: nothing ever flows
  cc.validate();

  SchedulerConfig scfg = cfg.scheduler_cfg;
  scfg.seed = mix_seed(cfg.seed ^ 0x5c4ed);
  Scheduler scheduler(cfg.scheduler, scfg);
  RandomStream arrivals_rng = make_stream(cfg.seed, 0xa7);

  const auto flows = static_cast<std::size_t>(topo.num_flows());
  SummaryMetrics out;
  out.scheduler = std::string(to_string(cfg.scheduler));
  out.frames = cfg.frames;
  out.v = cc.v;
  out.c_max = cc.c_max;
  std::vector<double> delivered_total(flows, 0.0);
  double weight_total = 0.0;

  QueueMatrix q = make_queues(topo);
  for (std::uint64_t t = 1; t <= cfg.frames; ++t) {
    const FlowMatrix lambda = congestion_control(q, topo, cc);
    const FlowMatrix a = sample_arrivals(lambda, topo, cfg.arrival_mode, arrivals_rng);

    const WeightContext ctx(topo, q);
    const Schedule sch = scheduler.next(ctx);
    if (auto issues = audit(sch, topo, scheduler.over_power()); !issues.empty()) throw AuditError(t, std::move(issues));
    weight_total += sch.weight;

    const std::vector<double> caps = schedule_capacities(sch, topo);
    const RateAssignment ra = assign_flow_rates(q, topo, ctx.backpressure(), caps);
    const std::vector<double> delivered = update_queues(q, topo, ra, a);

    out.injected_total += a.sum();
    for (std::size_t f = 0; f < flows; ++f) {
      delivered_total[f] += delivered[f];
      out.delivered_total += delivered[f];
    }
    const std::string key = schedule_key(sch, topo);
    ++out.histogram[key];

    if (observer) {
      FrameRecord rec;
      rec.frame = t;
      rec.sum_queue = q.sum();
      rec.delivered = &delivered;
      rec.key_hash = key_hash(key);
      rec.queues = &q;
      rec.schedule = &sch;
      observer(rec);
    }
    if (t % cfg.record_interval == 0 || t == cfg.frames) {
      out.sample_frames.push_back(t);
      out.sample_max_queue.push_back(q.size() ? q.maxCoeff() : 0.0);
      std::vector<double> running(flows);
      for (std::size_t f = 0; f < flows; ++f) running[f] = delivered_total[f] / static_cast<double>(t);
      out.sample_rates.push_back(std::move(running));
    }
  }

  out.flow_rates.resize(flows);
  for (std::size_t f = 0; f < flows; ++f) out.flow_rates[f] = delivered_total[f] / static_cast<double>(cfg.frames);
  out.sum_rate = std::accumulate(out.flow_rates.begin(), out.flow_rates.end(), 0.0);
  out.utility = utility(out.flow_rates);
  std::vector<std::uint64_t> counts;
  for (const auto& [key, count] : out.histogram) counts.push_back(count);
  out.coverage95 = coverage95(counts);
  out.final_max_queue = q.size() ? q.maxCoeff() : 0.0;
  out.final_queue_total = q.sum();
  out.scheduler_stats = scheduler.stats();
  out.mean_weight = weight_total / static_cast<double>(cfg.frames);
  out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace bpmm
