#pragma once

#include <charconv>
#include <fstream>
#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "tcsnn/error.hpp"
#include "tcsnn/spike.hpp"

// Line-oriented dataset format:
//
//   # comment
//   channels=<n> classes=<k> steps=<T>
//   example label=<c>
//   <channel> <timestep>
//   ...
//
// Events inside an example may interleave channels but each channel's
// timesteps must be strictly increasing.

namespace tcsnn {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Parses `key=<int>` tokens; returns false on any mismatch.
inline bool parse_kv_int(std::string_view token, std::string_view key, std::int64_t& out) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
      token[key.size()] != '=')
    return false;
  return parse_int(token.substr(key.size() + 1), out);
}

}  // namespace detail

inline SpikeDataset parse_event_stream(std::istream& in, const std::string& source) {
  SpikeDataset ds;
  bool have_header = false;
  // Per example: channel -> steps, plus the label.
  std::vector<std::pair<int, std::vector<std::vector<Step>>>> pending;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto tokens = detail::split_ws(view);

    if (!have_header) {
      std::int64_t channels = 0, classes = 0, steps = 0;
      if (tokens.size() != 3 || !detail::parse_kv_int(tokens[0], "channels", channels) ||
          !detail::parse_kv_int(tokens[1], "classes", classes) ||
          !detail::parse_kv_int(tokens[2], "steps", steps))
        throw FormatError(source, lineno, "expected header 'channels=<n> classes=<k> steps=<T>'");
      if (channels < 1 || classes < 1 || steps < 0)
        throw FormatError(source, lineno, "header values out of range");
      ds.num_channels = static_cast<int>(channels);
      ds.num_classes = static_cast<int>(classes);
      ds.length_steps = steps;
      have_header = true;
      continue;
    }

    if (tokens[0] == "example") {
      std::int64_t label = -1;
      if (tokens.size() != 2 || !detail::parse_kv_int(tokens[1], "label", label))
        throw FormatError(source, lineno, "expected 'example label=<c>'");
      if (label < 0 || label >= ds.num_classes)
        throw FormatError(source, lineno, "label " + std::to_string(label) + " out of range");
      pending.emplace_back(static_cast<int>(label),
                           std::vector<std::vector<Step>>(static_cast<std::size_t>(ds.num_channels)));
      continue;
    }

    std::int64_t channel = 0, step = 0;
    if (tokens.size() != 2 || !detail::parse_int(tokens[0], channel) ||
        !detail::parse_int(tokens[1], step))
      throw FormatError(source, lineno, "expected '<channel> <timestep>'");
    if (pending.empty()) throw FormatError(source, lineno, "event before any 'example' line");
    if (channel < 0 || channel >= ds.num_channels)
      throw FormatError(source, lineno, "channel " + std::to_string(channel) + " out of range");
    if (step < 0 || step >= ds.length_steps)
      throw FormatError(source, lineno, "timestep " + std::to_string(step) + " out of range");
    auto& steps = pending.back().second[static_cast<std::size_t>(channel)];
    if (!steps.empty() && step <= steps.back())
      throw FormatError(source, lineno,
                        "non-monotonic timestep on channel " + std::to_string(channel));
    steps.push_back(step);
  }
  if (!have_header) throw FormatError(source, lineno, "missing header line");

  for (auto& [label, channels] : pending) {
    LabeledExample ex;
    ex.label = label;
    for (std::size_t c = 0; c < channels.size(); ++c)
      ex.channels.emplace_back(static_cast<int>(c), std::move(channels[c]), ds.length_steps);
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

inline SpikeDataset load_event_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open event file '" + path + "'");
  return parse_event_stream(in, path);
}

/// Events are written in (timestep, channel) order, like an AER stream.
inline void write_event_stream(std::ostream& out, const SpikeDataset& ds) {
  ds.validate();
  out << "channels=" << ds.num_channels << " classes=" << ds.num_classes
      << " steps=" << ds.length_steps << '\n';
  for (const auto& ex : ds.examples) {
    out << "example label=" << ex.label << '\n';
    std::vector<std::pair<Step, int>> events;
    for (const auto& train : ex.channels)
      for (Step t : train.events()) events.emplace_back(t, train.channel_id());
    std::sort(events.begin(), events.end());
    for (const auto& [t, c] : events) out << c << ' ' << t << '\n';
  }
}

inline void export_event_file(const std::string& path, const SpikeDataset& ds) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write event file '" + path + "'");
  write_event_stream(out, ds);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace tcsnn
