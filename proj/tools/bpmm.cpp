// Command-line front end: drop generation, single runs, multi-drop
// comparisons and the interference check.
#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bpmm/interference.hpp"
#include "bpmm/serialize.hpp"

namespace fs = std::filesystem;
using namespace bpmm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by run, compare and interference-check.
struct SimFlags {
  std::string config;
  std::string scheduler;
  std::uint64_t frames = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int exhaustive_max_n = 0;
  int mp_max_iters = 0;
  std::string mp_policy;
  std::string mp_factorization;
  std::string arrival_mode;
  double v_factor = 0.0;
  std::uint64_t record_interval = 0;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON file mirroring the simulation config; flags override it")
        ->check(CLI::ExistingFile);
    app->add_option("--scheduler", scheduler,
                    "mwm, sfwbf, sfwmp, exact_mbp, mfwmp, mfwmpsp, mfwmpop, mfwlinop, mfwlinsp, mfwpac");
    app->add_option("--frames", frames, "frames to simulate (default 200000)")->check(CLI::PositiveNumber);
    app->add_option_function<std::uint64_t>(
        "--seed", [this](std::uint64_t s) { seed = s, seed_set = true; }, "simulation seed (arrivals, PaC)");
    app->add_option("--exhaustive-max-n", exhaustive_max_n, "node limit for exhaustive role search (default 20)")
        ->check(CLI::Range(1, kMaxNodes));
    app->add_option("--mp-max-iters", mp_max_iters, "message-passing iteration cap (default 100)")
        ->check(CLI::PositiveNumber);
    app->add_option("--mp-policy", mp_policy, "power policy of the MP schedulers: waterfilling, split, over, single");
    app->add_option("--mp-factorization", mp_factorization, "node or pairwise");
    app->add_option("--arrival-mode", arrival_mode, "fluid or poisson");
    app->add_option("--v-factor", v_factor, "V = factor * C_max^2 (default 10)")->check(CLI::PositiveNumber);
    app->add_option("--record-interval", record_interval, "frames between metric samples")->check(CLI::PositiveNumber);
  }

  // Precedence: defaults, then `base_doc` (a manifest's config), then the
  // --config file, then flags.
  SimConfig resolve(const Json* base_doc = nullptr) const {
    SimConfig cfg;
    try {
      if (base_doc) apply_config(*base_doc, cfg);
      if (!config.empty()) {
        std::ifstream in(config);
        apply_config(Json::parse(in), cfg);
      }
      if (!scheduler.empty()) cfg.scheduler = parse_scheduler_kind(scheduler);
      if (frames) cfg.frames = frames;
      if (seed_set) cfg.seed = seed;
      if (exhaustive_max_n) cfg.scheduler_cfg.exhaustive_max_n = exhaustive_max_n;
      if (mp_max_iters) cfg.scheduler_cfg.mp.max_iters = mp_max_iters;
      if (!mp_policy.empty()) cfg.scheduler_cfg.mp_policy = parse_power_policy(mp_policy);
      if (!mp_factorization.empty()) cfg.scheduler_cfg.mp.factorization = parse_factorization(mp_factorization);
      if (!arrival_mode.empty()) cfg.arrival_mode = parse_arrival_mode(arrival_mode);
      if (v_factor > 0.0) cfg.v_factor = v_factor;
      if (record_interval) cfg.record_interval = record_interval;
      cfg.validate();
    } catch (const Json::exception& e) {
      throw UsageError(std::string("bad config: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

std::string fmt(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

Topology read_drop(const std::string& path) {
  try {
    return load_topology(path);
  } catch (const Json::exception& e) {
    throw UsageError("cannot parse drop " + path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError("invalid drop " + path + ": " + e.what());
  }
}

void report_diagnostics(const Topology& topo) {
  const Diagnostics d = validate(topo);
  for (const std::string& m : d.messages) std::cerr << "warning: " << m << "\n";
}

int threads_from_env() {
  if (const char* env = std::getenv("BPMM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return omp_get_max_threads();
}

// ---- gen ----------------------------------------------------------------

struct GenArgs {
  std::uint64_t seed = 0;
  int n_ue = 10;
  double radius = 200.0;
  std::string out;
  bool no_fading = false;
};

int cmd_gen(const GenArgs& a) {
  const Topology topo = generate_drop(a.seed, a.n_ue, a.radius);
  report_diagnostics(topo);
  write_file_atomic(a.out, dump_topology(topo, !a.no_fading));
  std::cout << "wrote " << a.out << ": " << topo.num_nodes() << " nodes, " << topo.num_links() / 2 << " links, "
            << topo.num_flows() << " flows\n";
  return 0;
}

// ---- run ----------------------------------------------------------------

struct RunArgs {
  std::string drop;
  std::string out_dir = ".";
  std::string queues_csv;
  bool no_frames_csv = false;
  SimFlags sim;
};

int cmd_run(const RunArgs& a) {
  const SimConfig cfg = a.sim.resolve();
  const Topology topo = read_drop(a.drop);
  report_diagnostics(topo);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);

  std::ostringstream frames_csv, queues_csv;
  frames_csv << std::setprecision(10) << "frame,sum_queue";
  for (int f = 0; f < topo.num_flows(); ++f) frames_csv << ",delivered_" << f;
  frames_csv << ",key_hash\n";
  queues_csv << std::setprecision(10) << "frame,node,flow,q\n";
  const bool want_queues = !a.queues_csv.empty();
  FrameObserver observer = [&](const FrameRecord& r) {
    if (!a.no_frames_csv) {
      frames_csv << r.frame << ',' << r.sum_queue;
      for (double d : *r.delivered) frames_csv << ',' << d;
      frames_csv << ',' << std::hex << r.key_hash << std::dec << '\n';
    }
    if (want_queues && r.frame % cfg.record_interval == 0) {
      const QueueMatrix& q = *r.queues;
      for (Eigen::Index n = 0; n < q.rows(); ++n)
        for (Eigen::Index f = 0; f < q.cols(); ++f) queues_csv << r.frame << ',' << n << ',' << f << ',' << q(n, f) << '\n';
    }
  };

  const SummaryMetrics m = run(topo, cfg, observer);
  Json summary = summary_to_json(m);
  summary["config"] = config_to_json(cfg);
  summary["drop"] = a.drop;
  write_file_atomic(dir / "summary.json", summary.dump(1) + "\n");
  if (!a.no_frames_csv) write_file_atomic(dir / "frames.csv", frames_csv.str());
  if (want_queues) write_file_atomic(a.queues_csv, queues_csv.str());

  std::vector<std::pair<std::string, std::uint64_t>> hist(m.histogram.begin(), m.histogram.end());
  std::stable_sort(hist.begin(), hist.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::ostringstream hist_csv;
  hist_csv << "rank,key,count\n";
  for (std::size_t i = 0; i < hist.size(); ++i) hist_csv << i + 1 << ",\"" << hist[i].first << "\"," << hist[i].second << '\n';
  write_file_atomic(dir / "histogram.csv", hist_csv.str());

  std::cout << m.scheduler << ": sum_rate " << fmt(m.sum_rate) << " bits/frame, utility " << fmt(m.utility.value)
            << ", coverage95 " << m.coverage95 << ", final max queue " << fmt(m.final_max_queue) << "\n";
  if (!m.utility.starved_flows.empty()) {
    std::cout << "starved flows:";
    for (int f : m.utility.starved_flows) std::cout << ' ' << f;
    std::cout << "\n";
  }
  return 0;
}

// ---- compare --------------------------------------------------------------

struct CompareArgs {
  std::string manifest;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> schedulers;
  int n_ue = 10;
  double radius = 200.0;
  std::string out_dir;
  SimFlags sim;
};

struct Cell {
  std::uint64_t seed = 0;
  SchedulerKind kind{};
  bool ok = false;
  std::string error;
  SummaryMetrics metrics;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

int cmd_compare(CompareArgs a) {
  Json manifest_config;
  if (!a.manifest.empty()) {
    try {
      std::ifstream in(a.manifest);
      const Json doc = Json::parse(in);
      if (doc.contains("config")) manifest_config = doc.at("config");
      if (a.seeds.empty() && doc.contains("seeds")) a.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
      if (a.schedulers.empty() && doc.contains("schedulers"))
        a.schedulers = doc.at("schedulers").get<std::vector<std::string>>();
      if (a.out_dir.empty() && doc.contains("out_dir")) a.out_dir = doc.at("out_dir").get<std::string>();
      a.n_ue = doc.value("n_ue", a.n_ue);
      a.radius = doc.value("radius", a.radius);
    } catch (const Json::exception& e) {
      throw UsageError(std::string("bad manifest: ") + e.what());
    }
  }
  const SimConfig base = a.sim.resolve(manifest_config.is_null() ? nullptr : &manifest_config);
  if (a.seeds.empty()) throw UsageError("compare needs at least one drop seed");
  if (a.schedulers.empty()) throw UsageError("compare needs at least one scheduler");
  if (a.out_dir.empty()) a.out_dir = ".";
  std::vector<SchedulerKind> kinds;
  try {
    for (const std::string& s : a.schedulers) kinds.push_back(parse_scheduler_kind(s));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::vector<Cell> cells;
  for (std::uint64_t seed : a.seeds)
    for (SchedulerKind k : kinds) cells.push_back(Cell{seed, k, false, {}, {}});

  std::vector<Topology> drops;
  for (std::uint64_t seed : a.seeds) drops.push_back(generate_drop(seed, a.n_ue, a.radius));

  const int threads = threads_from_env();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Cell& c = cells[i];
    SimConfig cfg = base;
    cfg.scheduler = c.kind;
    cfg.seed = base.seed ^ static_cast<std::uint64_t>(i);
    const auto d = static_cast<std::size_t>(std::find(a.seeds.begin(), a.seeds.end(), c.seed) - a.seeds.begin());
    try {
      c.metrics = run(drops[d], cfg);
      c.ok = true;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  }

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::ostringstream cells_csv;
  cells_csv << std::setprecision(10) << "row,drop_seed,scheduler,status,sum_rate,utility,coverage95,final_max_queue\n";
  std::map<SchedulerKind, std::vector<double>> rates;
  int failed = 0;
  for (const Cell& c : cells) {
    const std::string name(to_string(c.kind));
    if (!c.ok) {
      ++failed;
      std::cerr << "cell seed " << c.seed << " " << name << " failed: " << c.error << "\n";
      cells_csv << "cell," << c.seed << ',' << name << ",failed,,,,\n";
      continue;
    }
    cells_csv << "cell," << c.seed << ',' << name << ",ok," << c.metrics.sum_rate << ',' << fmt(c.metrics.utility.value)
              << ',' << c.metrics.coverage95 << ',' << c.metrics.final_max_queue << '\n';
    rates[c.kind].push_back(c.metrics.sum_rate);
  }
  for (SchedulerKind k : kinds) {
    const std::string name(to_string(k));
    cells_csv << "mean,," << name << ",," << mean_of(rates[k]) << ",,,\n";
    cells_csv << "stddev,," << name << ",," << stddev_of(rates[k]) << ",,,\n";
  }
  write_file_atomic(dir / "comparison.csv", cells_csv.str());

  // Wide table: one row per drop, one sum-rate column per scheduler, and a
  // flag telling whether the listed schedulers are in non-increasing order.
  std::ostringstream wide;
  wide << std::setprecision(10) << "drop_seed";
  for (SchedulerKind k : kinds) wide << ',' << to_string(k);
  wide << ",ordered\n";
  int violations = 0;
  for (std::uint64_t seed : a.seeds) {
    wide << seed;
    std::vector<double> row;
    for (SchedulerKind k : kinds) {
      const auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.seed == seed && c.kind == k; });
      if (it->ok) {
        row.push_back(it->metrics.sum_rate);
        wide << ',' << it->metrics.sum_rate;
      } else {
        row.push_back(std::nan(""));
        wide << ',';
      }
    }
    bool ordered = true;
    for (std::size_t i = 1; i < row.size(); ++i) ordered = ordered && row[i - 1] >= row[i];
    violations += ordered ? 0 : 1;
    wide << ',' << (ordered ? 1 : 0) << '\n';
  }
  for (const char* agg : {"mean", "stddev"}) {
    wide << agg;
    for (SchedulerKind k : kinds) wide << ',' << (agg[0] == 'm' ? mean_of(rates[k]) : stddev_of(rates[k]));
    wide << ",\n";
  }
  write_file_atomic(dir / "sum_rate_by_drop.csv", wide.str());

  std::cout << "cells: " << cells.size() - static_cast<std::size_t>(failed) << " ok, " << failed << " failed\n";
  std::cout << "order violations (" << a.schedulers.front();
  for (std::size_t i = 1; i < a.schedulers.size(); ++i) std::cout << " >= " << a.schedulers[i];
  std::cout << "): " << violations << " of " << a.seeds.size() << " drops\n";
  for (std::size_t i = 1; i < kinds.size(); ++i) {
    const double den = mean_of(rates[kinds[i]]);
    std::cout << "mean(" << to_string(kinds[i - 1]) << ")/mean(" << to_string(kinds[i])
              << ") = " << (den > 0.0 ? fmt(mean_of(rates[kinds[i - 1]]) / den) : "n/a") << "\n";
  }
  return 0;
}

// ---- interference-check ---------------------------------------------------

struct InterferenceArgs {
  std::string drop;
  std::uint64_t sample_interval = 100;
  std::string out;
  SimFlags sim;
};

int cmd_interference(const InterferenceArgs& a) {
  SimConfig cfg = a.sim.resolve();
  if (a.sim.scheduler.empty()) cfg.scheduler = SchedulerKind::SFWBF;
  if (!a.sim.frames) cfg.frames = 20000;
  const Topology topo = read_drop(a.drop);
  if (!topo.has_fading()) throw UsageError("drop " + a.drop + " carries no fading matrices");

  std::ostringstream csv;
  csv << std::setprecision(10)
      << "frame,link,tx,rx,signal_w,auto_w,same_port_w,cross_w,noise_w,inr,rate_if,rate_sinr,rate_gap\n";
  std::vector<double> gaps;
  run(topo, cfg, [&](const FrameRecord& r) {
    if (r.frame % a.sample_interval != 0) return;
    for (const LinkInterference& li : evaluate_interference(*r.schedule, topo)) {
      const DirectedLink& l = topo.link(li.link);
      csv << r.frame << ',' << li.link << ',' << l.tx << ',' << l.rx << ',' << li.signal << ',' << li.auto_interference
          << ',' << li.same_port << ',' << li.cross << ',' << li.noise << ',' << li.inr() << ',' << li.rate_if << ','
          << li.rate_sinr << ',' << li.rate_gap() << '\n';
      if (li.rate_if > 0.0) gaps.push_back(li.rate_gap());
    }
  });
  if (!a.out.empty()) write_file_atomic(a.out, csv.str());
  if (gaps.empty()) {
    std::cout << "no active links were sampled\n";
  } else {
    std::cout << "sampled link activations: " << gaps.size() << ", median rate gap " << fmt(median(gaps))
              << ", max " << fmt(*std::max_element(gaps.begin(), gaps.end())) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Back-pressure scheduling simulator for multi-hop mmWave picocells"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate and serialize a random drop");
  gen_cmd->add_option("--seed", gen.seed, "drop seed");
  gen_cmd->add_option("--n-ue", gen.n_ue, "number of UEs")->check(CLI::Range(1, kMaxNodes - 1 - kRelayCount));
  gen_cmd->add_option("--radius", gen.radius, "UE disk radius in meters")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen.out, "drop file to write")->required();
  gen_cmd->add_flag("--no-fading", gen.no_fading, "omit fading matrices");

  RunArgs runa;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate one drop with one scheduler");
  run_cmd->add_option("drop", runa.drop, "drop file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", runa.out_dir, "output directory for summary.json, frames.csv, histogram.csv");
  run_cmd->add_option("--queues-csv", runa.queues_csv, "also write queue snapshots every record interval");
  run_cmd->add_flag("--no-frames-csv", runa.no_frames_csv, "skip the per-frame CSV");
  runa.sim.attach(run_cmd);

  CompareArgs cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "run every drop seed with every scheduler");
  cmp_cmd->add_option("--manifest", cmp.manifest, "JSON with seeds, schedulers, out_dir, config")
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("--seeds", cmp.seeds, "drop seeds")->delimiter(',');
  cmp_cmd->add_option("--schedulers", cmp.schedulers, "schedulers, in the expected sum-rate order")->delimiter(',');
  cmp_cmd->add_option("--n-ue", cmp.n_ue, "UEs per drop")->check(CLI::Range(1, kMaxNodes - 1 - kRelayCount));
  cmp_cmd->add_option("--radius", cmp.radius, "UE disk radius in meters")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--out", cmp.out_dir, "output directory");
  cmp.sim.attach(cmp_cmd);

  InterferenceArgs itf;
  CLI::App* itf_cmd = app.add_subcommand("interference-check", "compare interference-free and SINR link rates");
  itf_cmd->add_option("drop", itf.drop, "drop file with fading matrices")->required()->check(CLI::ExistingFile);
  itf_cmd->add_option("--sample-interval", itf.sample_interval, "evaluate every k-th frame's schedule")
      ->check(CLI::PositiveNumber);
  itf_cmd->add_option("--out", itf.out, "per-link CSV");
  itf.sim.attach(itf_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*run_cmd) return cmd_run(runa);
    if (*cmp_cmd) return cmd_compare(cmp);
    if (*itf_cmd) return cmd_interference(itf);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const AuditError& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    for (const std::string& issue : e.issues()) std::cerr << "  " << issue << "\n";
    return kExitAbort;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::cerr << "aborted: invariant violated: " << e.what() << "\n";
    return kExitAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
