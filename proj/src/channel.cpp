#include "bpmm/channel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace bpmm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLosShadowingDb = 5.8;
constexpr double kNlosShadowingDb = 8.7;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

void require_distance(double d) {
  if (!(d > 0.0)) throw std::domain_error("link distance must be positive");
}
}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::BS: return "BS";
    case NodeKind::RN: return "RN";
    case NodeKind::UE: return "UE";
  }
  return "?";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "BS") return NodeKind::BS;
  if (text == "RN") return NodeKind::RN;
  if (text == "UE") return NodeKind::UE;
  throw std::invalid_argument("unknown node kind: " + std::string(text));
}

std::string_view to_string(LinkState state) {
  switch (state) {
    case LinkState::Out: return "OUT";
    case LinkState::Los: return "LOS";
    case LinkState::Nlos: return "NLOS";
  }
  return "?";
}

LinkState parse_link_state(std::string_view text) {
  if (text == "OUT") return LinkState::Out;
  if (text == "LOS") return LinkState::Los;
  if (text == "NLOS") return LinkState::Nlos;
  throw std::invalid_argument("unknown link state: " + std::string(text));
}

double RadioParams::tx_power_dbm(NodeKind kind) const {
  switch (kind) {
    case NodeKind::BS: return tx_power_bs_dbm;
    case NodeKind::RN: return tx_power_rn_dbm;
    case NodeKind::UE: return tx_power_ue_dbm;
  }
  return tx_power_ue_dbm;
}

double RadioParams::noise_figure_db(NodeKind kind) const {
  switch (kind) {
    case NodeKind::BS: return noise_figure_bs_db;
    case NodeKind::RN: return noise_figure_rn_db;
    case NodeKind::UE: return noise_figure_ue_db;
  }
  return noise_figure_ue_db;
}

int RadioParams::array_elements(NodeKind kind) const {
  switch (kind) {
    case NodeKind::BS: return elements_bs;
    case NodeKind::RN: return elements_rn;
    case NodeKind::UE: return elements_ue;
  }
  return elements_ue;
}

void RadioParams::validate() const {
  for (double v : {carrier_hz, bandwidth_hz, frame_duration, thermal_noise_dbm_hz, tx_power_bs_dbm,
                   tx_power_rn_dbm, tx_power_ue_dbm, noise_figure_bs_db, noise_figure_rn_db,
                   noise_figure_ue_db}) {
    if (!std::isfinite(v)) throw std::invalid_argument("radio parameters must be finite");
  }
  if (!(alpha1 > 0.0 && alpha1 <= 1.0) || !(alpha2 > 0.0 && alpha2 <= 1.0))
    throw std::invalid_argument("alpha1 and alpha2 must lie in (0, 1]");
  if (bandwidth_hz <= 0.0 || frame_duration <= 0.0)
    throw std::invalid_argument("bandwidth and frame duration must be positive");
  if (elements_bs < 1 || elements_rn < 1 || elements_ue < 1)
    throw std::invalid_argument("array sizes must be positive");
}

double outage_probability(double d) {
  require_distance(d);
  return 1.0 - std::min(1.0, std::exp(-0.0334 * d + 5.2));
}

double los_probability(double d) {
  return (1.0 - outage_probability(d)) * std::exp(-0.0149 * d);
}

LinkState sample_link_state(double d, RandomStream& rng) {
  const double p_out = outage_probability(d);
  const double p_los = los_probability(d);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < p_out) return LinkState::Out;
  if (u < p_out + p_los) return LinkState::Los;
  return LinkState::Nlos;
}

double pathloss_db(double d, LinkState state, double shadowing_db) {
  require_distance(d);
  switch (state) {
    case LinkState::Out: return std::numeric_limits<double>::infinity();
    case LinkState::Los: return 61.4 + 20.0 * std::log10(d) + shadowing_db;
    case LinkState::Nlos: return 72.0 + 29.2 * std::log10(d) + shadowing_db;
  }
  return std::numeric_limits<double>::infinity();
}

double sample_pathloss(double d, LinkState state, RandomStream& rng) {
  require_distance(d);
  if (state == LinkState::Out) return std::numeric_limits<double>::infinity();
  const double sigma = state == LinkState::Los ? kLosShadowingDb : kNlosShadowingDb;
  return pathloss_db(d, state, std::normal_distribution<double>(0.0, sigma)(rng));
}

CVector array_response(const ArrayGeometry& geom, double theta) {
  const int n = geom.element_count();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double phase = -std::numbers::pi * std::sin(theta);
  CVector a(n);
  for (int i = 0; i < n; ++i) a(i) = scale * std::polar(1.0, phase * i);
  return a;
}

CMatrix compose_fading(const ArrayGeometry& tx, const ArrayGeometry& rx,
                       const std::vector<Ray>& rays, double normalization) {
  CMatrix h = CMatrix::Zero(rx.element_count(), tx.element_count());
  for (const Ray& ray : rays) {
    h.noalias() += ray.amplitude * array_response(rx, ray.aoa) * array_response(tx, ray.aod).transpose();
  }
  return h / normalization;
}

CMatrix sample_fading(const ArrayGeometry& tx, const ArrayGeometry& rx, RandomStream& rng,
                      const FadingParams& fp) {
  std::poisson_distribution<int> cluster_count(fp.mean_clusters);
  std::uniform_real_distribution<double> uniform_angle(0.0, kTwoPi);
  std::exponential_distribution<double> spread(1.0 / (fp.mean_angular_spread_deg * std::numbers::pi / 180.0));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

  const int clusters = std::max(1, cluster_count(rng));
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(clusters * fp.rays_per_cluster));
  for (int k = 0; k < clusters; ++k) {
    const double aoa_mean = uniform_angle(rng);
    const double aod_mean = uniform_angle(rng);
    const double rms = spread(rng);
    std::normal_distribution<double> offset(0.0, rms);
    for (int l = 0; l < fp.rays_per_cluster; ++l) {
      const double aoa = wrap_angle(aoa_mean + offset(rng));
      const double aod = wrap_angle(aod_mean + offset(rng));
      const double re = gauss(rng);
      const double im = gauss(rng);
      rays.push_back({Complex(re, im), aoa, aod});
    }
  }
  return compose_fading(tx, rx, rays, std::sqrt(static_cast<double>(clusters * fp.rays_per_cluster)));
}

Beamformer beamform(const CMatrix& h) {
  Beamformer bf;
  if (h.size() == 0 || h.cwiseAbs2().sum() == 0.0) {
    bf.w_rx = CVector::Unit(std::max<Eigen::Index>(h.rows(), 1), 0);
    bf.w_tx = CVector::Unit(std::max<Eigen::Index>(h.cols(), 1), 0);
    return bf;
  }
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma = svd.singularValues()(0);
  bf.w_rx = svd.matrixU().col(0).conjugate();
  bf.w_tx = svd.matrixV().col(0);
  bf.gain = sigma * sigma;
  return bf;
}

Beamformer reverse(const Beamformer& bf) { return Beamformer{bf.w_tx, bf.w_rx, bf.gain}; }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double noise_power_watts(double noise_figure_db, const RadioParams& params) {
  return dbm_to_watts(params.thermal_noise_dbm_hz + noise_figure_db) * params.bandwidth_hz;
}

double unit_snr(double pl_db, double bf_gain, double tx_power_dbm, double rx_noise_figure_db,
                const RadioParams& params) {
  if (!std::isfinite(pl_db)) return 0.0;
  const double g = std::pow(10.0, -pl_db / 10.0);
  return dbm_to_watts(tx_power_dbm) * bf_gain * g / noise_power_watts(rx_noise_figure_db, params);
}

double rate_from_snr(double p_fraction, double snr, const RadioParams& params) {
  if (p_fraction <= 0.0 || snr <= 0.0) return 0.0;
  return params.rate_scale() * std::log2(1.0 + params.alpha2 * p_fraction * snr);
}

double link_rate(double p_fraction, const LinkChannel& chan, const RadioParams& params) {
  if (chan.state == LinkState::Out) return 0.0;
  return rate_from_snr(p_fraction, chan.unit_snr, params);
}

double link_rate(double p_fraction, const LinkChannel& chan, double tx_power_dbm,
                 double rx_noise_figure_db, const RadioParams& params) {
  if (chan.state == LinkState::Out) return 0.0;
  return rate_from_snr(p_fraction, unit_snr(chan.pathloss_db, chan.bf_gain, tx_power_dbm, rx_noise_figure_db, params),
                       params);
}

}  // namespace bpmm
