#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tcsnn/compress.hpp"
#include "tcsnn/error.hpp"
#include "tcsnn/fixed_point.hpp"
#include "tcsnn/neuron.hpp"
#include "tcsnn/rng.hpp"

namespace tcsnn {

/// Liquid state machine: inputs -> recurrent reservoir on a 3-D grid ->
/// fully connected plastic readout.
struct LsmConfig {
  int num_inputs = 78;
  int reservoir_size = 135;
  int num_readout = 26;
  std::array<int, 3> grid = {3, 3, 15};

  // Connection probability C * exp(-(d / lambda)^2), by (pre, post) class.
  double c_ee = 0.3;
  double c_ei = 0.2;
  double c_ie = 0.4;
  double c_ii = 0.1;
  double lambda = 2.0;
  double excitatory_fraction = 0.8;

  int input_fanout = 4;
  int input_max_exponent = 3;  // input weights +-2^e, e in [0, 3]

  // Reservoir weight magnitudes as power-of-two exponents.
  int w_ee_exponent = 0;
  int w_ei_exponent = 0;
  int w_ie_exponent = 1;
  int w_ii_exponent = 0;

  NeuronModel model = NeuronModel::IowLif;
  LIFParams neuron;
  std::optional<BurstParams> burst;
  FixedPointFormat format;
  CompressionConfig compression;
  std::uint64_t seed = 1;

  void validate() const {
    if (num_inputs < 1 || reservoir_size < 1 || num_readout < 1)
      throw ParameterError("LSM layer sizes must be >= 1");
    if (grid[0] < 1 || grid[1] < 1 || grid[2] < 1 ||
        static_cast<long>(grid[0]) * grid[1] * grid[2] != reservoir_size)
      throw ParameterError("reservoir grid product must equal reservoir_size");
    for (double c : {c_ee, c_ei, c_ie, c_ii})
      if (!(c >= 0.0 && c <= 1.0)) throw ParameterError("connection probability outside [0, 1]");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be > 0");
    if (!(excitatory_fraction > 0.0 && excitatory_fraction < 1.0))
      throw ParameterError("excitatory_fraction must be in (0, 1)");
    if (input_fanout < 0 || input_fanout > reservoir_size)
      throw ParameterError("input_fanout must be in [0, reservoir_size]");
    for (int e : {input_max_exponent, w_ee_exponent, w_ei_exponent, w_ie_exponent, w_ii_exponent})
      if (e < 0 || e > 15) throw ParameterError("weight exponents must be in [0, 15]");
    neuron.validate();
    format.validate();
    compression.validate();
    if (burst) burst->validate();
    if (is_bursting(model) && !burst) throw ParameterError("bursting model needs burst parameters");
  }
};

/// Fixed synapse with weight sign * 2^exponent. Node ids: inputs first,
/// then reservoir, then readout.
struct Synapse {
  std::int32_t pre = 0;
  std::int32_t post = 0;
  std::int8_t exponent = 0;
  std::int8_t sign = 1;
  bool plastic = false;
  friend bool operator==(const Synapse&, const Synapse&) = default;
};

struct Network {
  int num_inputs = 0;
  int reservoir_size = 0;
  int num_readout = 0;
  NeuronModel model = NeuronModel::IowLif;
  LIFParams neuron;
  std::optional<BurstParams> burst;
  FixedPointFormat format;
  CompressionConfig compression;
  std::uint64_t seed = 0;
  std::vector<bool> excitatory;  // per reservoir neuron
  /// Input->reservoir and reservoir->reservoir synapses (all fixed).
  std::vector<Synapse> synapses;
  /// Plastic reservoir->readout weights in `format` units,
  /// row-major [readout][reservoir].
  std::vector<Raw> readout_weights;

  int num_nodes() const { return num_inputs + reservoir_size + num_readout; }
  int reservoir_node(int i) const { return num_inputs + i; }
  int readout_node(int r) const { return num_inputs + reservoir_size + r; }

  Raw& readout_weight(int r, int i) {
    return readout_weights[static_cast<std::size_t>(r) * reservoir_size + i];
  }
  Raw readout_weight(int r, int i) const {
    return readout_weights[static_cast<std::size_t>(r) * reservoir_size + i];
  }

  /// Every synapse including the plastic readout ones (exponent/sign of a
  /// plastic entry are placeholders; its value lives in readout_weights).
  std::vector<Synapse> all_synapses() const {
    std::vector<Synapse> out = synapses;
    for (int r = 0; r < num_readout; ++r)
      for (int i = 0; i < reservoir_size; ++i)
        out.push_back({reservoir_node(i), readout_node(r), 0, 1, true});
    return out;
  }

  /// Reprograms the global compression ratio (programmable builds only).
  void set_compression_ratio(int gamma) {
    if (!compression.programmable)
      throw StateError("compression ratio is fixed in this build");
    CompressionConfig next = compression;
    next.gamma = gamma;
    next.validate();
    compression = next;
  }

  void validate() const {
    if (static_cast<int>(excitatory.size()) != reservoir_size)
      throw ParameterError("excitatory flags size mismatch");
    if (readout_weights.size() != static_cast<std::size_t>(num_readout) * reservoir_size)
      throw ParameterError("readout weight matrix size mismatch");
    const int first_readout = num_inputs + reservoir_size;
    for (const Synapse& s : synapses) {
      if (s.plastic) throw ParameterError("fixed synapse list contains a plastic synapse");
      if (s.pre < 0 || s.pre >= first_readout || s.post < num_inputs || s.post >= first_readout)
        throw ParameterError("synapse endpoints outside input/reservoir layers");
      if (s.sign != 1 && s.sign != -1) throw ParameterError("synapse sign must be +-1");
    }
    neuron.validate();
    format.validate();
    compression.validate();
  }

  friend bool operator==(const Network&, const Network&) = default;
};

inline std::array<int, 3> grid_position(int index, const std::array<int, 3>& grid) {
  return {index % grid[0], (index / grid[0]) % grid[1], index / (grid[0] * grid[1])};
}

inline Network build_lsm(const LsmConfig& cfg) {
  cfg.validate();
  Network net;
  net.num_inputs = cfg.num_inputs;
  net.reservoir_size = cfg.reservoir_size;
  net.num_readout = cfg.num_readout;
  net.model = cfg.model;
  net.neuron = cfg.neuron;
  net.burst = cfg.burst;
  net.format = cfg.format;
  net.compression = cfg.compression;
  net.seed = cfg.seed;

  const int N = cfg.reservoir_size;
  Rng rng(derive_seed(cfg.seed, 100));

  // Exact excitatory count, random placement (partial Fisher-Yates).
  std::vector<int> order(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = N - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
  const int num_exc = std::clamp(static_cast<int>(std::lround(cfg.excitatory_fraction * N)), 0, N);
  net.excitatory.assign(static_cast<std::size_t>(N), false);
  for (int i = 0; i < num_exc; ++i) net.excitatory[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  // Input fanout: distinct random targets, weights +-2^e.
  for (int c = 0; c < cfg.num_inputs; ++c) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < cfg.input_fanout) {
      const int t = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(N)));
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (int t : targets) {
      Synapse s;
      s.pre = c;
      s.post = net.reservoir_node(t);
      s.exponent = static_cast<std::int8_t>(uniform_int(rng, 0, cfg.input_max_exponent));
      s.sign = bernoulli(rng, 0.5) ? 1 : -1;
      net.synapses.push_back(s);
    }
  }

  // Distance-dependent recurrent wiring, no self-connections.
  for (int pre = 0; pre < N; ++pre) {
    const auto a = grid_position(pre, cfg.grid);
    const bool pre_exc = net.excitatory[static_cast<std::size_t>(pre)];
    for (int post = 0; post < N; ++post) {
      if (pre == post) continue;
      const auto b = grid_position(post, cfg.grid);
      const double d2 = std::pow(a[0] - b[0], 2) + std::pow(a[1] - b[1], 2) + std::pow(a[2] - b[2], 2);
      const bool post_exc = net.excitatory[static_cast<std::size_t>(post)];
      const double c = pre_exc ? (post_exc ? cfg.c_ee : cfg.c_ei) : (post_exc ? cfg.c_ie : cfg.c_ii);
      const int e = pre_exc ? (post_exc ? cfg.w_ee_exponent : cfg.w_ei_exponent)
                            : (post_exc ? cfg.w_ie_exponent : cfg.w_ii_exponent);
      const double p = c * std::exp(-d2 / (cfg.lambda * cfg.lambda));
      if (bernoulli(rng, p))
        net.synapses.push_back({net.reservoir_node(pre), net.reservoir_node(post),
                                static_cast<std::int8_t>(e),
                                static_cast<std::int8_t>(pre_exc ? 1 : -1), false});
    }
  }

  net.readout_weights.assign(static_cast<std::size_t>(cfg.num_readout) * N, 0);
  return net;
}

// ---------------------------------------------------------------------------
// Text description. Round-trips every field bit-exactly.

namespace detail {

inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline std::string expect_key(std::istream& in, const std::string& key, std::size_t& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head != key) throw FormatError("network", lineno, "expected '" + key + "', got '" + head + "'");
    std::string rest;
    std::getline(ls, rest);
    return rest;
  }
  throw FormatError("network", lineno, "unexpected end of input, expected '" + key + "'");
}

}  // namespace detail

inline void write_network(std::ostream& out, const Network& net) {
  using detail::format_real;
  out << "tcsnn-network 1\n";
  out << "model " << to_string(net.model) << '\n';
  out << "seed " << net.seed << '\n';
  out << "sizes " << net.num_inputs << ' ' << net.reservoir_size << ' ' << net.num_readout << '\n';
  out << "format " << net.format.total_bits << ' ' << net.format.frac_bits << ' '
      << (net.format.is_signed ? 1 : 0) << '\n';
  out << "compression " << net.compression.gamma << ' ' << (net.compression.programmable ? 1 : 0)
      << ' ' << net.compression.max_gamma << '\n';
  out << "lif " << (net.neuron.tau_m_nom ? format_real(*net.neuron.tau_m_nom) : "none") << ' '
      << format_real(net.neuron.u_th) << ' ' << format_real(net.neuron.resistance) << ' '
      << net.neuron.n_max << '\n';
  out << "synapse " << static_cast<int>(net.neuron.synapse.order) << ' '
      << format_real(net.neuron.synapse.tau_s1_nom) << ' '
      << format_real(net.neuron.synapse.tau_s2_nom) << ' ' << format_real(net.neuron.synapse.q)
      << '\n';
  if (net.burst)
    out << "burst " << format_real(net.burst->beta) << ' ' << net.burst->max_exponent << '\n';
  else
    out << "burst none\n";
  out << "excitatory ";
  for (bool e : net.excitatory) out << (e ? '1' : '0');
  out << '\n';
  out << "synapses " << net.synapses.size() << '\n';
  for (const Synapse& s : net.synapses)
    out << s.pre << ' ' << s.post << ' ' << (s.sign > 0 ? '+' : '-') << int{s.exponent} << '\n';
  out << "readout_weights " << net.readout_weights.size() << '\n';
  for (std::size_t i = 0; i < net.readout_weights.size(); ++i)
    out << net.readout_weights[i] << (i + 1 == net.readout_weights.size() || (i + 1) % 16 == 0 ? '\n' : ' ');
}

inline Network read_network(std::istream& in) {
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> FormatError { return FormatError("network", lineno, what); };
  auto fields = [&](const std::string& key) {
    return std::istringstream(detail::expect_key(in, key, lineno));
  };

  Network net;
  {
    auto s = fields("tcsnn-network");
    int version = 0;
    if (!(s >> version) || version != 1) throw fail("unsupported network description version");
  }
  {
    auto s = fields("model");
    std::string name;
    s >> name;
    net.model = parse_neuron_model(name);
  }
  if (!(fields("seed") >> net.seed)) throw fail("bad seed");
  {
    auto s = fields("sizes");
    if (!(s >> net.num_inputs >> net.reservoir_size >> net.num_readout)) throw fail("bad sizes");
  }
  {
    auto s = fields("format");
    int sig = 0;
    if (!(s >> net.format.total_bits >> net.format.frac_bits >> sig)) throw fail("bad format");
    net.format.is_signed = sig != 0;
  }
  {
    auto s = fields("compression");
    int prog = 0;
    if (!(s >> net.compression.gamma >> prog >> net.compression.max_gamma)) throw fail("bad compression");
    net.compression.programmable = prog != 0;
  }
  {
    auto s = fields("lif");
    std::string tau;
    if (!(s >> tau >> net.neuron.u_th >> net.neuron.resistance >> net.neuron.n_max)) throw fail("bad lif");
    if (tau == "none")
      net.neuron.tau_m_nom.reset();
    else
      net.neuron.tau_m_nom = std::stod(tau);
  }
  {
    auto s = fields("synapse");
    int order = 0;
    if (!(s >> order >> net.neuron.synapse.tau_s1_nom >> net.neuron.synapse.tau_s2_nom >>
          net.neuron.synapse.q) || order < 0 || order > 2)
      throw fail("bad synapse");
    net.neuron.synapse.order = static_cast<SynapseOrder>(order);
  }
  {
    auto s = fields("burst");
    std::string first;
    s >> first;
    if (first != "none") {
      BurstParams b;
      b.beta = std::stod(first);
      if (!(s >> b.max_exponent)) throw fail("bad burst");
      net.burst = b;
    }
  }
  {
    auto s = fields("excitatory");
    std::string bits;
    s >> bits;
    if (static_cast<int>(bits.size()) != net.reservoir_size) throw fail("excitatory flag count mismatch");
    for (char c : bits) net.excitatory.push_back(c == '1');
  }
  std::size_t count = 0;
  if (!(fields("synapses") >> count)) throw fail("bad synapse count");
  net.synapses.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string line;
    if (!std::getline(in, line)) throw fail("truncated synapse list");
    ++lineno;
    std::istringstream ls(line);
    Synapse syn;
    std::string w;
    if (!(ls >> syn.pre >> syn.post >> w) || w.size() < 2 || (w[0] != '+' && w[0] != '-'))
      throw fail("bad synapse line");
    syn.sign = w[0] == '+' ? 1 : -1;
    syn.exponent = static_cast<std::int8_t>(std::stoi(w.substr(1)));
    net.synapses.push_back(syn);
  }
  if (!(fields("readout_weights") >> count)) throw fail("bad readout weight count");
  net.readout_weights.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    if (!(in >> net.readout_weights[i])) throw fail("truncated readout weights");
  net.validate();
  return net;
}

inline void export_network(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_network(out, net);
}

inline Network import_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open '" + path + "'");
  return read_network(in);
}

}  // namespace tcsnn
