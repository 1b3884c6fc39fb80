#pragma once

#include <vector>

#include "bpmm/schedule.hpp"

namespace bpmm {

/// Received powers at the receiver of one active link, in watts, after the
/// receiver's beamformer for that link.
struct LinkInterference {
  int link = -1;
  double signal = 0.0;
  double auto_interference = 0.0;  // the transmitter's other beams
  double same_port = 0.0;          // other transmitters aimed at this receiver
  double cross = 0.0;              // other transmitters aimed elsewhere
  double noise = 0.0;
  double rate_if = 0.0;    // interference-free rate, bits per frame
  double rate_sinr = 0.0;  // rate with the interference added to the noise

  double interference() const { return auto_interference + same_port + cross; }
  double inr() const { return interference() / noise; }
  /// Relative rate loss (rate_if - rate_sinr) / rate_if, 0 for a dead link.
  double rate_gap() const { return rate_if > 0.0 ? (rate_if - rate_sinr) / rate_if : 0.0; }
};

/// Evaluates every link with p > 0 in `sch`. Node pairs without a realized
/// channel (no link between them) contribute no interference. Requires
/// stored fading matrices.
std::vector<LinkInterference> evaluate_interference(const Schedule& sch, const Topology& topo);

double median(std::vector<double> values);

}  // namespace bpmm
