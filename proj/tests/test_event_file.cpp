#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "tcsnn/event_file.hpp"

using namespace tcsnn;

namespace {

SpikeDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_event_stream(in, "mem");
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const FormatError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no FormatError for:\n" << text;
  return 0;
}

}  // namespace

TEST(EventFile, SingleEvent) {
  const auto ds = parse("channels=4 classes=2 steps=10\nexample label=1\n3 7\n");
  ASSERT_EQ(ds.examples.size(), 1u);
  EXPECT_EQ(ds.examples[0].label, 1);
  EXPECT_EQ(ds.examples[0].channels[3].events(), (std::vector<Step>{7}));
  for (int c = 0; c < 3; ++c) EXPECT_TRUE(ds.examples[0].channels[static_cast<std::size_t>(c)].events().empty());
}

TEST(EventFile, EmptyExampleHasNoSpikes) {
  const auto ds = parse("# header follows\nchannels=2 classes=1 steps=5\n\nexample label=0\nexample label=0\n0 1\n");
  ASSERT_EQ(ds.examples.size(), 2u);
  for (const auto& ch : ds.examples[0].channels) EXPECT_EQ(ch.spike_count(), 0u);
  EXPECT_EQ(ds.examples[1].channels[0].spike_count(), 1u);
}

TEST(EventFile, CommentsAndInterleavedChannels) {
  const auto ds = parse(
      "channels=2 classes=1 steps=9   # trailing comment\n"
      "example label=0\n"
      "1 2\n0 3\n  1 4  \n0 8\n");
  EXPECT_EQ(ds.examples[0].channels[0].events(), (std::vector<Step>{3, 8}));
  EXPECT_EQ(ds.examples[0].channels[1].events(), (std::vector<Step>{2, 4}));
}

TEST(EventFile, RoundTripIsExact) {
  const auto ds = synthetic_task(3, 16, 200, 4, 5, 77);
  std::ostringstream out;
  write_event_stream(out, ds);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_event_stream(in, "rt"), ds);

  const auto path = std::filesystem::temp_directory_path() / "tcsnn_event_roundtrip.txt";
  export_event_file(path.string(), ds);
  EXPECT_EQ(load_event_file(path.string()), ds);
  std::filesystem::remove(path);
}

TEST(EventFile, ReportsLineNumbers) {
  EXPECT_EQ(error_line("channels=2 classes=1\n"), 1u);
  EXPECT_EQ(error_line("channels=2 classes=1 steps=10\nexample label=0\n0 5\n0 5\n"), 4u);
  EXPECT_EQ(error_line("channels=2 classes=1 steps=10\nexample label=0\n0 5\n0 3\n"), 4u);
  EXPECT_EQ(error_line("channels=2 classes=2 steps=10\n\nexample label=2\n"), 3u);
  EXPECT_EQ(error_line("channels=2 classes=1 steps=10\nexample label=0\n2 1\n"), 3u);
  EXPECT_EQ(error_line("channels=2 classes=1 steps=10\nexample label=0\n1 10\n"), 3u);
  EXPECT_EQ(error_line("channels=2 classes=1 steps=10\n0 1\n"), 2u);
  EXPECT_EQ(error_line("channels=2 classes=1 steps=10\nexample label=0\n1 x\n"), 3u);
  EXPECT_EQ(error_line("# only a comment\n"), 1u);
}

TEST(EventFile, ErrorMessageNamesSourceAndLine) {
  std::istringstream in("channels=2 classes=1 steps=10\nexample label=0\n0 5\n0 2\n");
  try {
    parse_event_stream(in, "data.txt");
    FAIL();
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("data.txt"), std::string::npos);
    EXPECT_NE(msg.find("4"), std::string::npos);
  }
}

TEST(EventFile, MissingFile) {
  EXPECT_THROW(load_event_file("/nonexistent/dir/events.txt"), ParameterError);
}

TEST(EventFile, UnwritablePath) {
  const auto ds = synthetic_task(2, 2, 10, 0, 1, 1);
  EXPECT_THROW(export_event_file("/nonexistent/dir/events.txt", ds), IoError);
}
