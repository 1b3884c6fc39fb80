#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "bpmm/random.hpp"

namespace bpmm {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class NodeKind { BS, RN, UE };

std::string_view to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view text);

/// Antenna panel abstraction. Planar panels are folded into a uniform linear
/// array with the same total element count.
class ArrayGeometry {
 public:
  explicit ArrayGeometry(int element_count) : elements_(element_count) {
    if (element_count < 1) throw std::domain_error("array needs at least one element");
  }
  int element_count() const { return elements_; }

 private:
  int elements_;
};

enum class LinkState { Out, Los, Nlos };

std::string_view to_string(LinkState state);
LinkState parse_link_state(std::string_view text);

/// Radio constants shared by every node of a drop.
struct RadioParams {
  double carrier_hz = 28e9;
  double bandwidth_hz = 1e9;
  double alpha1 = 1.0;  // bandwidth penalty
  double alpha2 = 0.5;  // SNR penalty (-3 dB)
  double frame_duration = 1.0;
  double thermal_noise_dbm_hz = -174.0;
  double tx_power_bs_dbm = 30.0, tx_power_rn_dbm = 25.0, tx_power_ue_dbm = 20.0;
  double noise_figure_bs_db = 5.0, noise_figure_rn_db = 6.0, noise_figure_ue_db = 7.0;
  int elements_bs = 64, elements_rn = 36, elements_ue = 16;

  double tx_power_dbm(NodeKind kind) const;
  double noise_figure_db(NodeKind kind) const;
  int array_elements(NodeKind kind) const;

  /// Bits per frame at unit spectral efficiency: alpha1 * T_f * W.
  double rate_scale() const { return alpha1 * frame_duration * bandwidth_hz; }

  void validate() const;
};

/// Small-scale fading generator settings (cluster/ray geometric model).
struct FadingParams {
  double mean_clusters = 1.9;
  int rays_per_cluster = 20;
  double mean_angular_spread_deg = 10.0;
};

/// Scalar summary of one directed link realization.
struct LinkChannel {
  LinkState state = LinkState::Out;
  double pathloss_db = 0.0;  // +inf when Out
  double bf_gain = 0.0;      // |w_r H w_t|^2, linear
  double unit_snr = 0.0;     // P_n G g / (W N0) at full power, before alpha2
  double cap_full_power = 0.0;
  double cap_split_power = 0.0;
};

struct Beamformer {
  CVector w_rx;  // applied as w_rx^T H
  CVector w_tx;
  double gain = 0.0;
};

/// One ray of the geometric model; used to compose H directly.
struct Ray {
  Complex amplitude;
  double aoa;  // radians
  double aod;
};

double outage_probability(double distance_m);
double los_probability(double distance_m);

LinkState sample_link_state(double distance_m, RandomStream& rng);

/// Pathloss with the shadowing term supplied explicitly (dB).
double pathloss_db(double distance_m, LinkState state, double shadowing_db);
double sample_pathloss(double distance_m, LinkState state, RandomStream& rng);

CVector array_response(const ArrayGeometry& geom, double theta);

/// H = (1/norm) * sum_rays g a_r(aoa) a_t(aod)^T, size rx x tx.
CMatrix compose_fading(const ArrayGeometry& tx, const ArrayGeometry& rx,
                       const std::vector<Ray>& rays, double normalization);

CMatrix sample_fading(const ArrayGeometry& tx, const ArrayGeometry& rx, RandomStream& rng,
                      const FadingParams& fp = {});

/// Dominant singular pair of H. For an all-zero H the gain is 0 and the
/// vectors are the first canonical basis vectors.
Beamformer beamform(const CMatrix& h);

/// Beamformer for the reverse direction (H^T) of a reciprocal channel.
Beamformer reverse(const Beamformer& bf);

double dbm_to_watts(double dbm);
double noise_power_watts(double noise_figure_db, const RadioParams& params);

double unit_snr(double pathloss_db, double bf_gain, double tx_power_dbm, double rx_noise_figure_db,
                const RadioParams& params);

/// Bits per frame for a link running at a fraction of its transmitter's power.
double rate_from_snr(double p_fraction, double unit_snr, const RadioParams& params);
double link_rate(double p_fraction, const LinkChannel& chan, const RadioParams& params);
double link_rate(double p_fraction, const LinkChannel& chan, double tx_power_dbm,
                 double rx_noise_figure_db, const RadioParams& params);

}  // namespace bpmm
