#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "tcsnn/network.hpp"
#include "tcsnn/reference.hpp"

using namespace tcsnn;

namespace {

LsmConfig small_config() {
  LsmConfig c;
  c.num_inputs = 10;
  c.reservoir_size = 27;
  c.num_readout = 3;
  c.grid = {3, 3, 3};
  c.seed = 5;
  return c;
}

}  // namespace

TEST(BuildLsm, ReferenceSizes) {
  LsmConfig c;
  c.num_readout = 26;
  const Network net = build_lsm(c);
  EXPECT_EQ(net.num_inputs, 78);
  EXPECT_EQ(net.reservoir_size, 135);
  EXPECT_EQ(net.num_readout, 26);
  EXPECT_EQ(net.readout_weights.size(), 26u * 135u);
  EXPECT_EQ(net.num_nodes(), 78 + 135 + 26);
  EXPECT_EQ(net.all_synapses().size(), net.synapses.size() + 26u * 135u);
}

TEST(BuildLsm, DeterministicUnderSeed) {
  const auto a = build_lsm(small_config());
  const auto b = build_lsm(small_config());
  EXPECT_EQ(a, b);
  auto other = small_config();
  other.seed = 6;
  EXPECT_NE(build_lsm(other).synapses, a.synapses);
}

TEST(BuildLsm, VanishingLambdaRemovesRecurrence) {
  auto c = small_config();
  c.lambda = 1e-9;
  const auto net = build_lsm(c);
  for (const Synapse& s : net.synapses) EXPECT_LT(s.pre, net.num_inputs);
  EXPECT_EQ(net.synapses.size(), static_cast<std::size_t>(c.num_inputs * c.input_fanout));
}

TEST(BuildLsm, InputFanoutAndWeights) {
  const auto c = small_config();
  const auto net = build_lsm(c);
  std::vector<std::set<int>> targets(static_cast<std::size_t>(c.num_inputs));
  for (const Synapse& s : net.synapses) {
    if (s.pre >= net.num_inputs) continue;
    targets[static_cast<std::size_t>(s.pre)].insert(s.post);
    EXPECT_GE(s.exponent, 0);
    EXPECT_LE(s.exponent, 3);
    EXPECT_TRUE(s.sign == 1 || s.sign == -1);
    EXPECT_GE(s.post, net.num_inputs);
    EXPECT_LT(s.post, net.num_inputs + net.reservoir_size);
  }
  for (const auto& t : targets) EXPECT_EQ(t.size(), 4u);
}

TEST(BuildLsm, StructuralInvariants) {
  const auto net = build_lsm(LsmConfig{});
  int exc = 0;
  for (bool e : net.excitatory) exc += e;
  EXPECT_EQ(exc, 108);  // 0.8 * 135
  for (const Synapse& s : net.synapses) {
    EXPECT_FALSE(s.plastic);
    EXPECT_NE(s.pre, s.post);
    if (s.pre >= net.num_inputs) {
      // Sign follows the presynaptic class.
      EXPECT_EQ(s.sign > 0, static_cast<bool>(net.excitatory[static_cast<std::size_t>(s.pre - net.num_inputs)]));
    }
  }
  for (const Synapse& s : net.all_synapses())
    if (s.post >= net.num_inputs + net.reservoir_size) {
      EXPECT_TRUE(s.plastic);
    }
  for (Raw w : net.readout_weights) EXPECT_EQ(w, 0);
}

TEST(BuildLsm, ConnectionRateFollowsDistanceRule) {
  // Expected recurrent count from the probability rule, summed over pairs.
  LsmConfig c;
  double expected = 0;
  const auto net = build_lsm(c);
  for (int a = 0; a < c.reservoir_size; ++a) {
    for (int b = 0; b < c.reservoir_size; ++b) {
      if (a == b) continue;
      const auto pa = grid_position(a, c.grid), pb = grid_position(b, c.grid);
      const double d2 = std::pow(pa[0] - pb[0], 2) + std::pow(pa[1] - pb[1], 2) + std::pow(pa[2] - pb[2], 2);
      const bool ea = net.excitatory[static_cast<std::size_t>(a)], eb = net.excitatory[static_cast<std::size_t>(b)];
      const double cp = ea ? (eb ? c.c_ee : c.c_ei) : (eb ? c.c_ie : c.c_ii);
      expected += cp * std::exp(-d2 / (c.lambda * c.lambda));
    }
  }
  const double actual = static_cast<double>(net.synapses.size()) - c.num_inputs * c.input_fanout;
  EXPECT_NEAR(actual, expected, 4 * std::sqrt(expected));
}

TEST(BuildLsm, RejectsInvalidConfigs) {
  auto c = small_config();
  c.grid = {3, 3, 4};
  EXPECT_THROW(build_lsm(c), ParameterError);
  c = small_config();
  c.input_fanout = 28;
  EXPECT_THROW(build_lsm(c), ParameterError);
  c = small_config();
  c.c_ee = 1.5;
  EXPECT_THROW(build_lsm(c), ParameterError);
  c = small_config();
  c.lambda = 0;
  EXPECT_THROW(build_lsm(c), ParameterError);
  c = small_config();
  c.excitatory_fraction = 1.0;
  EXPECT_THROW(build_lsm(c), ParameterError);
  c = small_config();
  c.model = NeuronModel::IowBurstLif;
  EXPECT_THROW(build_lsm(c), ParameterError);
  c = small_config();
  c.compression.gamma = 17;
  EXPECT_THROW(build_lsm(c), ParameterError);
}

TEST(GridPosition, XFastest) {
  const std::array<int, 3> g{3, 3, 15};
  EXPECT_EQ(grid_position(0, g), (std::array<int, 3>{0, 0, 0}));
  EXPECT_EQ(grid_position(4, g), (std::array<int, 3>{1, 1, 0}));
  EXPECT_EQ(grid_position(134, g), (std::array<int, 3>{2, 2, 14}));
}

TEST(NetworkText, RoundTrip) {
  for (NeuronModel m : kAllModels) {
    auto c = reference_lsm_config(m, 1, 9);
    if (m == NeuronModel::Lif) c.neuron.tau_m_nom.reset();
    c.compression.programmable = true;
    Network net = build_lsm(c);
    for (std::size_t i = 0; i < net.readout_weights.size(); ++i)
      net.readout_weights[i] = static_cast<Raw>(i * 7919 % 100000) - 50000;
    std::stringstream s;
    write_network(s, net);
    EXPECT_EQ(read_network(s), net) << to_string(m);
  }
}

TEST(NetworkText, FileRoundTrip) {
  const Network net = build_lsm(small_config());
  const auto path = std::filesystem::temp_directory_path() / "tcsnn_network_rt.txt";
  export_network(path.string(), net);
  EXPECT_EQ(import_network(path.string()), net);
  std::filesystem::remove(path);
  EXPECT_THROW(import_network("/nonexistent/net.txt"), ParameterError);
  EXPECT_THROW(export_network("/nonexistent/net.txt", net), IoError);
}

TEST(NetworkText, MalformedInputReportsLine) {
  const Network net = build_lsm(small_config());
  std::stringstream s;
  write_network(s, net);
  std::string text = s.str();
  const auto pos = text.find("lif ");
  text.replace(pos, 4, "lfi ");
  std::istringstream in(text);
  try {
    read_network(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
  std::istringstream truncated(s.str().substr(0, s.str().size() / 2));
  EXPECT_THROW(read_network(truncated), FormatError);
}

TEST(SetCompressionRatio, RequiresProgrammableBuild) {
  Network net = build_lsm(small_config());
  EXPECT_THROW(net.set_compression_ratio(4), StateError);
  net.compression.programmable = true;
  net.set_compression_ratio(4);
  EXPECT_EQ(net.compression.gamma, 4);
  EXPECT_THROW(net.set_compression_ratio(0), ParameterError);
  EXPECT_THROW(net.set_compression_ratio(17), ParameterError);
  EXPECT_EQ(net.compression.gamma, 4);
}
