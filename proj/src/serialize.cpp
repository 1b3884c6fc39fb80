#include "bpmm/serialize.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>

namespace bpmm {

namespace {

constexpr const char* kDropFormat = "bpmm-drop";
constexpr int kDropVersion = 1;

Json params_to_json(const RadioParams& p) {
  return Json{{"carrier_hz", p.carrier_hz},
              {"bandwidth_hz", p.bandwidth_hz},
              {"alpha1", p.alpha1},
              {"alpha2", p.alpha2},
              {"frame_duration", p.frame_duration},
              {"thermal_noise_dbm_hz", p.thermal_noise_dbm_hz},
              {"tx_power_dbm", {{"BS", p.tx_power_bs_dbm}, {"RN", p.tx_power_rn_dbm}, {"UE", p.tx_power_ue_dbm}}},
              {"noise_figure_db",
               {{"BS", p.noise_figure_bs_db}, {"RN", p.noise_figure_rn_db}, {"UE", p.noise_figure_ue_db}}},
              {"array_elements", {{"BS", p.elements_bs}, {"RN", p.elements_rn}, {"UE", p.elements_ue}}}};
}

RadioParams params_from_json(const Json& j) {
  RadioParams p;
  p.carrier_hz = j.at("carrier_hz").get<double>();
  p.bandwidth_hz = j.at("bandwidth_hz").get<double>();
  p.alpha1 = j.at("alpha1").get<double>();
  p.alpha2 = j.at("alpha2").get<double>();
  p.frame_duration = j.at("frame_duration").get<double>();
  p.thermal_noise_dbm_hz = j.at("thermal_noise_dbm_hz").get<double>();
  const Json& pw = j.at("tx_power_dbm");
  p.tx_power_bs_dbm = pw.at("BS").get<double>();
  p.tx_power_rn_dbm = pw.at("RN").get<double>();
  p.tx_power_ue_dbm = pw.at("UE").get<double>();
  const Json& nf = j.at("noise_figure_db");
  p.noise_figure_bs_db = nf.at("BS").get<double>();
  p.noise_figure_rn_db = nf.at("RN").get<double>();
  p.noise_figure_ue_db = nf.at("UE").get<double>();
  const Json& el = j.at("array_elements");
  p.elements_bs = el.at("BS").get<int>();
  p.elements_rn = el.at("RN").get<int>();
  p.elements_ue = el.at("UE").get<int>();
  p.validate();
  return p;
}

Json matrix_to_json(const CMatrix& h) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      data.push_back(h(r, c).real());
      data.push_back(h(r, c).imag());
    }
  }
  return Json{{"rows", h.rows()}, {"cols", h.cols()}, {"re_im", std::move(data)}};
}

CMatrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const Json& data = j.at("re_im");
  if (rows < 1 || cols < 1 || data.size() != static_cast<std::size_t>(2 * rows * cols))
    throw std::invalid_argument("fading matrix size does not match its data");
  CMatrix h(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c, k += 2)
      h(r, c) = Complex(data[k].get<double>(), data[k + 1].get<double>());
  }
  return h;
}

}  // namespace

Json topology_to_json(const Topology& topo, bool include_fading) {
  Json doc;
  doc["format"] = kDropFormat;
  doc["version"] = kDropVersion;
  if (const auto& r = topo.recipe()) {
    doc["recipe"] = {{"seed", r->seed}, {"n_ue", r->n_ue}, {"radius", r->radius}};
  } else {
    doc["recipe"] = nullptr;
  }
  doc["params"] = params_to_json(topo.params());

  Json nodes = Json::array();
  for (const Node& n : topo.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"kind", std::string(to_string(n.kind))},
                     {"x", n.x},
                     {"y", n.y},
                     {"tx_power_dbm", n.tx_power_dbm},
                     {"noise_figure_db", n.noise_figure_db},
                     {"array_elements", n.array.element_count()}});
  }
  doc["nodes"] = std::move(nodes);

  Json links = Json::array();
  for (const DirectedLink& l : topo.links()) {
    Json e{{"id", l.id},
           {"tx", l.tx},
           {"rx", l.rx},
           {"state", std::string(to_string(l.chan.state))},
           {"pathloss_db", l.chan.pathloss_db},
           {"bf_gain", l.chan.bf_gain},
           {"cap_full_power", l.chan.cap_full_power},
           {"cap_split_power", l.chan.cap_split_power}};
    if (l.explicit_snr) e["unit_snr"] = l.chan.unit_snr;
    links.push_back(std::move(e));
  }
  doc["links"] = std::move(links);

  if (include_fading && topo.has_fading()) {
    // One matrix per node pair, oriented from the lower id to the higher.
    Json fading = Json::array();
    for (const DirectedLink& l : topo.links()) {
      if (l.pair < 0 || l.tx > l.rx) continue;
      fading.push_back({{"a", l.tx}, {"b", l.rx}, {"h", matrix_to_json(topo.pairs()[static_cast<std::size_t>(l.pair)].h)}});
    }
    doc["fading"] = std::move(fading);
  }

  Json flows = Json::array();
  for (const Flow& f : topo.flows()) flows.push_back({{"id", f.id}, {"sources", f.sources}, {"destinations", f.destinations}});
  doc["flows"] = std::move(flows);
  return doc;
}

Topology topology_from_json(const Json& doc) {
  if (doc.value("format", std::string()) != kDropFormat) throw std::invalid_argument("not a drop document");
  if (doc.at("version").get<int>() != kDropVersion) throw std::invalid_argument("unsupported drop version");
  const RadioParams params = params_from_json(doc.at("params"));

  std::vector<Node> nodes;
  for (const Json& j : doc.at("nodes")) {
    Node n;
    n.id = j.at("id").get<int>();
    n.kind = parse_node_kind(j.at("kind").get<std::string>());
    n.x = j.at("x").get<double>();
    n.y = j.at("y").get<double>();
    n.tx_power_dbm = j.at("tx_power_dbm").get<double>();
    n.noise_figure_db = j.at("noise_figure_db").get<double>();
    n.array = ArrayGeometry(j.at("array_elements").get<int>());
    nodes.push_back(std::move(n));
  }
  Topology topo(params, std::move(nodes));

  std::map<std::pair<int, int>, CMatrix> fading;
  if (doc.contains("fading")) {
    for (const Json& j : doc.at("fading")) {
      const int a = j.at("a").get<int>();
      const int b = j.at("b").get<int>();
      if (a >= b) throw std::invalid_argument("fading pairs must be listed low id first");
      fading.emplace(std::pair{a, b}, matrix_from_json(j.at("h")));
    }
  }

  // Links come in reciprocal pairs (a->b, b->a); reconnecting in file order
  // reproduces the original link ids.
  const Json& links = doc.at("links");
  if (links.size() % 2) throw std::invalid_argument("links must come in reciprocal pairs");
  for (std::size_t i = 0; i < links.size(); i += 2) {
    const Json& fwd = links[i];
    const Json& bwd = links[i + 1];
    const int a = fwd.at("tx").get<int>();
    const int b = fwd.at("rx").get<int>();
    if (bwd.at("tx").get<int>() != b || bwd.at("rx").get<int>() != a)
      throw std::invalid_argument("links must come in reciprocal pairs");
    if (fwd.contains("unit_snr")) {
      topo.connect_with_snr(a, b, fwd.at("unit_snr").get<double>(), bwd.at("unit_snr").get<double>());
      continue;
    }
    std::optional<PairFading> pf;
    if (auto it = fading.find({std::min(a, b), std::max(a, b)}); it != fading.end()) {
      pf.emplace();
      pf->h = it->second;
      pf->bf = beamform(pf->h);
      if (a > b) {
        // connect() expects the matrix oriented a -> b.
        pf->h.transposeInPlace();
        pf->bf = reverse(pf->bf);
      }
    }
    topo.connect(a, b, parse_link_state(fwd.at("state").get<std::string>()), fwd.at("pathloss_db").get<double>(),
                 fwd.at("bf_gain").get<double>(), std::move(pf));
  }

  for (const Json& j : doc.at("flows"))
    topo.add_flow(j.at("sources").get<std::vector<int>>(), j.at("destinations").get<std::vector<int>>());
  if (doc.contains("recipe") && !doc.at("recipe").is_null()) {
    const Json& r = doc.at("recipe");
    topo.set_recipe(DropRecipe{r.at("seed").get<std::uint64_t>(), r.at("n_ue").get<int>(), r.at("radius").get<double>()});
  }
  return topo;
}

std::string dump_topology(const Topology& topo, bool include_fading) {
  return topology_to_json(topo, include_fading).dump(1) + "\n";
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return topology_from_json(Json::parse(in));
}

Json summary_to_json(const SummaryMetrics& m) {
  Json j;
  j["scheduler"] = m.scheduler;
  j["frames"] = m.frames;
  j["v"] = m.v;
  j["c_max"] = m.c_max;
  j["flow_rates"] = m.flow_rates;
  j["sum_rate"] = m.sum_rate;
  // JSON has no infinity; a starved run reports null plus the starved flows.
  j["utility"] = std::isfinite(m.utility.value) ? Json(m.utility.value) : Json(nullptr);
  j["starved_flows"] = m.utility.starved_flows;
  j["coverage95"] = m.coverage95;
  j["distinct_schedules"] = m.histogram.size();
  j["final_max_queue"] = m.final_max_queue;
  j["injected_total"] = m.injected_total;
  j["delivered_total"] = m.delivered_total;
  j["final_queue_total"] = m.final_queue_total;
  j["mean_weight"] = m.mean_weight;
  j["elapsed_seconds"] = m.elapsed_seconds;
  const SchedulerStats& s = m.scheduler_stats;
  j["scheduler_stats"] = {{"calls", s.calls},
                          {"search_nodes", s.search_nodes},
                          {"milp_nodes", s.milp_nodes},
                          {"mp_iterations", s.mp_iterations},
                          {"mp_converged", s.mp_converged},
                          {"mp_stable", s.mp_stable},
                          {"mp_oscillation", s.mp_oscillation},
                          {"mp_iteration_cap", s.mp_iteration_cap}};
  Json hist = Json::object();
  for (const auto& [key, count] : m.histogram) hist[key] = count;
  j["schedule_histogram"] = std::move(hist);
  j["samples"] = {{"frame", m.sample_frames}, {"max_queue", m.sample_max_queue}};
  return j;
}

void apply_config(const Json& doc, SimConfig& cfg) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, val] : doc.items()) {
    if (key == "frames") {
      cfg.frames = val.get<std::uint64_t>();
    } else if (key == "scheduler") {
      cfg.scheduler = parse_scheduler_kind(val.get<std::string>());
    } else if (key == "v_factor") {
      cfg.v_factor = val.get<double>();
    } else if (key == "v") {
      if (val.is_null()) {
        cfg.v.reset();
      } else {
        cfg.v = val.get<double>();
      }
    } else if (key == "arrival_mode") {
      cfg.arrival_mode = parse_arrival_mode(val.get<std::string>());
    } else if (key == "seed") {
      cfg.seed = val.get<std::uint64_t>();
    } else if (key == "record_interval") {
      cfg.record_interval = val.get<std::uint64_t>();
    } else if (key == "exhaustive_max_n") {
      cfg.scheduler_cfg.exhaustive_max_n = val.get<int>();
    } else if (key == "search_kernel") {
      cfg.scheduler_cfg.kernel = parse_search_kernel(val.get<std::string>());
    } else if (key == "mp_policy") {
      if (val.is_null()) {
        cfg.scheduler_cfg.mp_policy.reset();
      } else {
        cfg.scheduler_cfg.mp_policy = parse_power_policy(val.get<std::string>());
      }
    } else if (key == "mp_max_iters") {
      cfg.scheduler_cfg.mp.max_iters = val.get<int>();
    } else if (key == "mp_factorization") {
      cfg.scheduler_cfg.mp.factorization = parse_factorization(val.get<std::string>());
    } else if (key == "mp_kernel") {
      cfg.scheduler_cfg.mp.kernel = parse_mp_kernel(val.get<std::string>());
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
}

Json config_to_json(const SimConfig& cfg) {
  const SchedulerConfig& s = cfg.scheduler_cfg;
  return Json{{"frames", cfg.frames},
              {"scheduler", std::string(to_string(cfg.scheduler))},
              {"v_factor", cfg.v_factor},
              {"v", cfg.v ? Json(*cfg.v) : Json(nullptr)},
              {"arrival_mode", std::string(to_string(cfg.arrival_mode))},
              {"seed", cfg.seed},
              {"record_interval", cfg.record_interval},
              {"exhaustive_max_n", s.exhaustive_max_n},
              {"search_kernel", std::string(to_string(s.kernel))},
              {"mp_policy", s.mp_policy ? Json(std::string(to_string(*s.mp_policy))) : Json(nullptr)},
              {"mp_max_iters", s.mp.max_iters},
              {"mp_factorization", std::string(to_string(s.mp.factorization))},
              {"mp_kernel", std::string(to_string(s.mp.kernel))}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bpmm
