#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tcsnn/error.hpp"
#include "tcsnn/event_file.hpp"
#include "tcsnn/learning.hpp"
#include "tcsnn/metrics.hpp"
#include "tcsnn/network.hpp"
#include "tcsnn/spike.hpp"

namespace tcsnn {

/// Bad configuration: unknown key, malformed value or violated invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

struct ResourceCounts {
  std::int64_t lut = 0;
  std::int64_t ff = 0;
  friend bool operator==(const ResourceCounts&, const ResourceCounts&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;

  // Dataset: synthetic unless dataset_path is set.
  std::optional<std::string> dataset_path;
  SyntheticTaskParams synthetic;
  double train_fraction = 0.8;

  /// lsm.num_inputs always follows the dataset; lsm.num_readout does too
  /// unless lsm.readout was given explicitly.
  LsmConfig lsm;
  bool readout_matches_classes = true;
  std::vector<int> gammas = {1, 2, 4, 8, 16};
  LearningParams learning;
  EnergyModel energy;
  std::map<int, ResourceCounts> resources;  // keyed by gamma; 1 is the baseline
  std::string output_dir = "tcsnn-out";

  void validate() const {
    if (gammas.empty()) throw ConfigError("compression.gammas must list at least one ratio");
    std::set<int> seen;
    for (int g : gammas) {
      if (g < 1 || g > lsm.compression.max_gamma)
        throw ConfigError("compression ratio " + std::to_string(g) + " outside [1, " +
                          std::to_string(lsm.compression.max_gamma) + "]");
      if (!seen.insert(g).second) throw ConfigError("compression ratio " + std::to_string(g) + " listed twice");
      if (g > 1 && !accepts_weighted_input(lsm.model))
        throw ConfigError(std::string(to_string(lsm.model)) + " cannot run compressed; use an IW/IOW model");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("dataset.train_fraction must be in (0, 1)");
    try {
      lsm.validate();
      learning.validate();
      energy.validate();
      if (!dataset_path) {
        if (synthetic.num_classes < 2) throw ParameterError("dataset.classes must be >= 2");
        if (synthetic.jitter_steps < 0 || synthetic.jitter_steps >= synthetic.length_steps)
          throw ParameterError("dataset.jitter must be in [0, dataset.steps)");
        if (synthetic.num_channels != lsm.num_inputs)
          throw ParameterError("dataset.channels must equal the network's input count");
      }
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    for (const auto& [g, r] : resources)
      if (r.lut < 0 || r.ff < 0) throw ConfigError("resource counts must be >= 0");
  }
};

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError("key '" + key + "': cannot parse '" + text + "' as a number");
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  return out;
}

inline SynapseOrder parse_synapse_order(const std::string& key, const std::string& text) {
  if (text == "0" || text == "zeroth") return SynapseOrder::Zeroth;
  if (text == "1" || text == "first") return SynapseOrder::First;
  if (text == "2" || text == "second") return SynapseOrder::Second;
  throw ConfigError("key '" + key + "': expected zeroth, first or second");
}

inline std::string_view synapse_order_name(SynapseOrder o) {
  switch (o) {
    case SynapseOrder::Zeroth: return "zeroth";
    case SynapseOrder::First: return "first";
    case SynapseOrder::Second: return "second";
  }
  return "?";
}

}  // namespace detail

/// Parses the key = value experiment format. Lines starting with '#' are
/// comments. `schema_version` is mandatory; unknown or repeated keys are
/// errors so typos never silently fall back to defaults.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "config") {
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed(detail::trim(line));
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key(detail::trim(trimmed.substr(0, eq)));
    const std::string value(detail::trim(trimmed.substr(eq + 1)));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, std::make_pair(value, lineno)).second)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": key '" + key + "' repeated");
  }

  auto version = kv.find("schema_version");
  if (version == kv.end()) throw ConfigError(source + ": missing schema_version");
  if (detail::parse_number<int>("schema_version", version->second.first) != kConfigSchemaVersion)
    throw ConfigError(source + ": unsupported schema_version '" + version->second.first + "'");
  kv.erase(version);

  ExperimentConfig c;
  std::string source_kind = "synthetic";

  for (const auto& [key, entry] : kv) {
    const std::string& v = entry.first;
    auto dbl = [&] { return detail::parse_number<double>(key, v); };
    auto integer = [&] { return detail::parse_number<int>(key, v); };
    auto exponent = [&] { return detail::parse_number<int>(key, v); };

    if (key == "seed") c.seed = detail::parse_number<std::uint64_t>(key, v);
    else if (key == "dataset.source") {
      if (v != "synthetic" && v != "file") throw ConfigError("dataset.source must be synthetic or file");
      source_kind = v;
    }
    else if (key == "dataset.path") c.dataset_path = v;
    else if (key == "dataset.classes") c.synthetic.num_classes = integer();
    else if (key == "dataset.channels") c.synthetic.num_channels = integer();
    else if (key == "dataset.steps") c.synthetic.length_steps = integer();
    else if (key == "dataset.jitter") c.synthetic.jitter_steps = integer();
    else if (key == "dataset.examples_per_class") c.synthetic.examples_per_class = integer();
    else if (key == "dataset.deletion") c.synthetic.deletion_prob = dbl();
    else if (key == "dataset.insertion") c.synthetic.insertion_prob = dbl();
    else if (key == "dataset.max_rate") c.synthetic.max_template_rate = dbl();
    else if (key == "dataset.train_fraction") c.train_fraction = dbl();
    else if (key == "lsm.reservoir") c.lsm.reservoir_size = integer();
    else if (key == "lsm.readout") { c.lsm.num_readout = integer(); c.readout_matches_classes = false; }
    else if (key == "lsm.grid") {
      const auto parts = detail::split_list(v);
      if (parts.size() != 3) throw ConfigError("lsm.grid needs three integers");
      for (int i = 0; i < 3; ++i) c.lsm.grid[static_cast<std::size_t>(i)] = detail::parse_number<int>(key, parts[static_cast<std::size_t>(i)]);
    }
    else if (key == "lsm.c_ee") c.lsm.c_ee = dbl();
    else if (key == "lsm.c_ei") c.lsm.c_ei = dbl();
    else if (key == "lsm.c_ie") c.lsm.c_ie = dbl();
    else if (key == "lsm.c_ii") c.lsm.c_ii = dbl();
    else if (key == "lsm.lambda") c.lsm.lambda = dbl();
    else if (key == "lsm.excitatory_fraction") c.lsm.excitatory_fraction = dbl();
    else if (key == "lsm.input_fanout") c.lsm.input_fanout = integer();
    else if (key == "lsm.input_max_exponent") c.lsm.input_max_exponent = exponent();
    else if (key == "lsm.w_ee_exponent") c.lsm.w_ee_exponent = exponent();
    else if (key == "lsm.w_ei_exponent") c.lsm.w_ei_exponent = exponent();
    else if (key == "lsm.w_ie_exponent") c.lsm.w_ie_exponent = exponent();
    else if (key == "lsm.w_ii_exponent") c.lsm.w_ii_exponent = exponent();
    else if (key == "neuron.model") {
      try {
        c.lsm.model = parse_neuron_model(v);
      } catch (const ParameterError& e) {
        throw ConfigError(e.what());
      }
    }
    else if (key == "neuron.tau_m") {
      if (v == "none") c.lsm.neuron.tau_m_nom.reset();
      else c.lsm.neuron.tau_m_nom = dbl();
    }
    else if (key == "neuron.u_th") c.lsm.neuron.u_th = dbl();
    else if (key == "neuron.resistance") c.lsm.neuron.resistance = dbl();
    else if (key == "neuron.n_max") c.lsm.neuron.n_max = integer();
    else if (key == "synapse.order") c.lsm.neuron.synapse.order = detail::parse_synapse_order(key, v);
    else if (key == "synapse.tau_s1") c.lsm.neuron.synapse.tau_s1_nom = dbl();
    else if (key == "synapse.tau_s2") c.lsm.neuron.synapse.tau_s2_nom = dbl();
    else if (key == "synapse.q") c.lsm.neuron.synapse.q = dbl();
    else if (key == "burst.beta") {
      if (!c.lsm.burst) c.lsm.burst = BurstParams{};
      c.lsm.burst->beta = dbl();
    }
    else if (key == "burst.max_exponent") {
      if (!c.lsm.burst) c.lsm.burst = BurstParams{};
      c.lsm.burst->max_exponent = integer();
    }
    else if (key == "format.total_bits") c.lsm.format.total_bits = integer();
    else if (key == "format.frac_bits") c.lsm.format.frac_bits = integer();
    else if (key == "compression.gammas") {
      c.gammas.clear();
      for (const auto& part : detail::split_list(v)) c.gammas.push_back(detail::parse_number<int>(key, part));
    }
    else if (key == "compression.max_gamma") c.lsm.compression.max_gamma = integer();
    else if (key == "compression.programmable") c.lsm.compression.programmable = detail::parse_bool(key, v);
    else if (key == "learning.eta") c.learning.eta = dbl();
    else if (key == "learning.tau_trace") c.learning.tau_trace_nom = dbl();
    else if (key == "learning.margin") c.learning.teacher_margin = integer();
    else if (key == "learning.epochs") c.learning.epochs = integer();
    else if (key == "learning.w_min") c.learning.w_min = dbl();
    else if (key == "learning.w_max") c.learning.w_max = dbl();
    else if (key == "learning.snap_power_of_two") c.learning.snap_power_of_two = detail::parse_bool(key, v);
    else if (key == "energy.e_synaptic_op") c.energy.e_synaptic_op = dbl();
    else if (key == "energy.e_neuron_update") c.energy.e_neuron_update = dbl();
    else if (key == "energy.e_spike") c.energy.e_spike = dbl();
    else if (key == "energy.p_static") c.energy.p_static = dbl();
    else if (key.rfind("resources.", 0) == 0) {
      const int g = detail::parse_number<int>(key, key.substr(10));
      const auto parts = detail::split_list(v);
      if (parts.size() != 2) throw ConfigError("key '" + key + "': expected '<lut> <ff>'");
      c.resources[g] = {detail::parse_number<std::int64_t>(key, parts[0]),
                        detail::parse_number<std::int64_t>(key, parts[1])};
    }
    else if (key == "output.dir") c.output_dir = v;
    else throw ConfigError(source + ":" + std::to_string(entry.second) + ": unknown key '" + key + "'");
  }

  if (source_kind == "file" && !c.dataset_path) throw ConfigError("dataset.source = file needs dataset.path");
  if (source_kind == "synthetic" && c.dataset_path)
    throw ConfigError("dataset.path is only valid with dataset.source = file");
  c.lsm.seed = c.seed;
  c.synthetic.seed = c.seed;
  c.learning.seed = c.seed;
  c.lsm.num_inputs = c.synthetic.num_channels;
  if (c.readout_matches_classes) c.lsm.num_readout = c.synthetic.num_classes;
  if (is_bursting(c.lsm.model) && !c.lsm.burst)
    throw ConfigError("bursting model '" + std::string(to_string(c.lsm.model)) + "' needs burst.beta");
  if (is_bursting(c.lsm.model) && c.lsm.neuron.synapse.order != SynapseOrder::Zeroth)
    throw ConfigError("bursting models need synapse.order = zeroth");
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

/// Canonical text form; parse_config(write_config(c)) reproduces c.
inline void write_config(std::ostream& out, const ExperimentConfig& c) {
  const auto real = detail::format_real;
  out << "schema_version = " << kConfigSchemaVersion << '\n';
  out << "seed = " << c.seed << '\n';
  if (c.dataset_path) {
    out << "dataset.source = file\n";
    out << "dataset.path = " << *c.dataset_path << '\n';
  } else {
    out << "dataset.source = synthetic\n";
  }
  const SyntheticTaskParams& s = c.synthetic;
  out << "dataset.classes = " << s.num_classes << '\n';
  out << "dataset.channels = " << s.num_channels << '\n';
  out << "dataset.steps = " << s.length_steps << '\n';
  out << "dataset.jitter = " << s.jitter_steps << '\n';
  out << "dataset.examples_per_class = " << s.examples_per_class << '\n';
  out << "dataset.deletion = " << real(s.deletion_prob) << '\n';
  out << "dataset.insertion = " << real(s.insertion_prob) << '\n';
  out << "dataset.max_rate = " << real(s.max_template_rate) << '\n';
  out << "dataset.train_fraction = " << real(c.train_fraction) << '\n';
  const LsmConfig& l = c.lsm;
  out << "lsm.reservoir = " << l.reservoir_size << '\n';
  if (!c.readout_matches_classes) out << "lsm.readout = " << l.num_readout << '\n';
  out << "lsm.grid = " << l.grid[0] << ' ' << l.grid[1] << ' ' << l.grid[2] << '\n';
  out << "lsm.c_ee = " << real(l.c_ee) << '\n';
  out << "lsm.c_ei = " << real(l.c_ei) << '\n';
  out << "lsm.c_ie = " << real(l.c_ie) << '\n';
  out << "lsm.c_ii = " << real(l.c_ii) << '\n';
  out << "lsm.lambda = " << real(l.lambda) << '\n';
  out << "lsm.excitatory_fraction = " << real(l.excitatory_fraction) << '\n';
  out << "lsm.input_fanout = " << l.input_fanout << '\n';
  out << "lsm.input_max_exponent = " << l.input_max_exponent << '\n';
  out << "lsm.w_ee_exponent = " << l.w_ee_exponent << '\n';
  out << "lsm.w_ei_exponent = " << l.w_ei_exponent << '\n';
  out << "lsm.w_ie_exponent = " << l.w_ie_exponent << '\n';
  out << "lsm.w_ii_exponent = " << l.w_ii_exponent << '\n';
  out << "neuron.model = " << to_string(l.model) << '\n';
  out << "neuron.tau_m = " << (l.neuron.tau_m_nom ? real(*l.neuron.tau_m_nom) : std::string("none")) << '\n';
  out << "neuron.u_th = " << real(l.neuron.u_th) << '\n';
  out << "neuron.resistance = " << real(l.neuron.resistance) << '\n';
  out << "neuron.n_max = " << l.neuron.n_max << '\n';
  out << "synapse.order = " << detail::synapse_order_name(l.neuron.synapse.order) << '\n';
  out << "synapse.tau_s1 = " << real(l.neuron.synapse.tau_s1_nom) << '\n';
  out << "synapse.tau_s2 = " << real(l.neuron.synapse.tau_s2_nom) << '\n';
  out << "synapse.q = " << real(l.neuron.synapse.q) << '\n';
  if (l.burst) {
    out << "burst.beta = " << real(l.burst->beta) << '\n';
    out << "burst.max_exponent = " << l.burst->max_exponent << '\n';
  }
  out << "format.total_bits = " << l.format.total_bits << '\n';
  out << "format.frac_bits = " << l.format.frac_bits << '\n';
  out << "compression.gammas = ";
  for (std::size_t i = 0; i < c.gammas.size(); ++i) out << (i ? "," : "") << c.gammas[i];
  out << '\n';
  out << "compression.max_gamma = " << l.compression.max_gamma << '\n';
  out << "compression.programmable = " << (l.compression.programmable ? "true" : "false") << '\n';
  const LearningParams& p = c.learning;
  out << "learning.eta = " << real(p.eta) << '\n';
  out << "learning.tau_trace = " << real(p.tau_trace_nom) << '\n';
  out << "learning.margin = " << p.teacher_margin << '\n';
  out << "learning.epochs = " << p.epochs << '\n';
  out << "learning.w_min = " << real(p.w_min) << '\n';
  out << "learning.w_max = " << real(p.w_max) << '\n';
  out << "learning.snap_power_of_two = " << (p.snap_power_of_two ? "true" : "false") << '\n';
  out << "energy.e_synaptic_op = " << real(c.energy.e_synaptic_op) << '\n';
  out << "energy.e_neuron_update = " << real(c.energy.e_neuron_update) << '\n';
  out << "energy.e_spike = " << real(c.energy.e_spike) << '\n';
  if (c.energy.p_static) out << "energy.p_static = " << real(*c.energy.p_static) << '\n';
  for (const auto& [g, r] : c.resources) out << "resources." << g << " = " << r.lut << ' ' << r.ff << '\n';
  out << "output.dir = " << c.output_dir << '\n';
}

}  // namespace tcsnn
