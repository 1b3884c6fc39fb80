#include <doctest.h>

#include "bpmm/interference.hpp"
#include "helpers.hpp"

using namespace bpmm;

namespace {

// BS 0 and two co-located RNs 1, 2 that see the BS through the same channel.
Topology twin_transmitters() {
  const RadioParams params;
  std::vector<Node> nodes{make_node(0, NodeKind::BS, 0.0, 0.0, params), make_node(1, NodeKind::RN, 50.0, 0.0, params),
                          make_node(2, NodeKind::RN, 50.0, 0.0, params)};
  Topology t(params, nodes);
  RandomStream rng(8);
  const CMatrix h = sample_fading(t.node(1).array, t.node(0).array, rng);
  const Beamformer bf = beamform(h);
  t.connect(1, 0, LinkState::Los, 100.0, bf.gain, PairFading{h, bf});
  t.connect(2, 0, LinkState::Los, 100.0, bf.gain, PairFading{h, bf});
  return t;
}

Schedule with_power(const Topology& t, std::initializer_list<std::pair<int, int>> links) {
  Schedule s;
  s.power.assign(static_cast<std::size_t>(t.num_links()), 0.0);
  for (auto [tx, rx] : links) {
    s.roles |= bit(tx);
    s.power[static_cast<std::size_t>(t.link_id(tx, rx))] = 1.0;
  }
  return s;
}

}  // namespace

TEST_CASE("a lone link sees no interference") {
  const Topology t = twin_transmitters();
  const auto r = evaluate_interference(with_power(t, {{1, 0}}), t);
  REQUIRE(r.size() == 1);
  CHECK(r[0].interference() == 0.0);
  CHECK(r[0].rate_sinr == doctest::Approx(r[0].rate_if).epsilon(1e-12));
  CHECK(r[0].rate_gap() == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("a twin aimed at the same receiver interferes at full strength") {
  const Topology t = twin_transmitters();
  const auto r = evaluate_interference(with_power(t, {{1, 0}, {2, 0}}), t);
  REQUIRE(r.size() == 2);
  for (const LinkInterference& li : r) {
    CHECK(li.same_port == doctest::Approx(li.signal).epsilon(1e-9));
    CHECK(li.auto_interference == 0.0);
    CHECK(li.cross == 0.0);
    CHECK(li.rate_sinr < li.rate_if);
    CHECK(li.rate_gap() > 0.0);
  }
}

TEST_CASE("interference needs fading") {
  Topology t = testing::bare_topology(2);
  t.connect_with_snr(0, 1, 1.0, 1.0);
  CHECK_THROWS_AS(evaluate_interference(with_power(t, {{0, 1}}), t), std::invalid_argument);
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK_THROWS(median({}));
}
