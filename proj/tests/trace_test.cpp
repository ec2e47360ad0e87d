#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hyltl/trace_io.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace hyltl;
using hyltl::testing::probe_error;

namespace {

HybridArc two_phase_arc() {
  std::vector<Phase> phases = {{0, 0.0, 1.0}, {1, 1.0, 1.0}};
  return HybridArc(HybridTimeDomain(std::move(phases)),
                   {{{0.0, {1.0, 0.0}}, {0.5, {0.875, -0.5}}, {1.0, {0.5, -1.0}}},
                    {{1.0, {0.5, 0.5}}}});
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("trace text round-trips samples bit-exactly") {
  std::mt19937_64 rng(42);
  for (int n = 0; n < 40; ++n) {
    Trace trace{hyltl::testing::random_arc(rng, 1 + n % 3),
                {{"producer", "trace_test"}, {"seed", std::to_string(n)}}};
    const std::string text = write_trace(trace);
    const Trace back = read_trace(text);

    CHECK_EQ(back.meta, trace.meta);
    CHECK_EQ(back.arc.dim(), trace.arc.dim());
    REQUIRE_EQ(back.arc.sample_count(), trace.arc.sample_count());
    const auto& want_phases = trace.arc.domain().phases();
    const auto& got_phases = back.arc.domain().phases();
    REQUIRE_EQ(got_phases.size(), want_phases.size());
    for (std::size_t p = 0; p < want_phases.size(); ++p) {
      CHECK_EQ(got_phases[p].j, want_phases[p].j);
      CHECK_EQ(got_phases[p].t_start, want_phases[p].t_start);
      CHECK_EQ(got_phases[p].t_end, want_phases[p].t_end);
    }
    for (std::size_t i = 0; i < trace.arc.sample_count(); ++i) {
      const auto want = trace.arc.sample(i);
      const auto got = back.arc.sample(i);
      CHECK_EQ(got.t, want.t);
      CHECK_EQ(got.j, want.j);
      CHECK_EQ(*got.x, *want.x);
    }
    CHECK_EQ(write_trace(back), text);
  }
}

TEST_CASE("trace serialization is deterministic") {
  Trace trace{two_phase_arc(), {{"b", "2"}, {"a", "0.1"}}};
  const std::string once = write_trace(trace);
  const std::string twice = write_trace(trace);
  CHECK_EQ(once, twice);
  CHECK(once.find("\"dim\"") != std::string::npos);
  CHECK(once.find("\"phases\"") != std::string::npos);
  CHECK(once.find("\"samples\"") != std::string::npos);
  CHECK(once.find("\"meta\"") != std::string::npos);
  // Sorted keys: "a" appears before "b" inside meta.
  CHECK_LT(once.find("\"a\""), once.find("\"b\""));
}

TEST_CASE("malformed trace documents are rejected") {
  CHECK_EQ(probe_error([] { read_trace("not json"); }).code, errc::bad_config);
  CHECK_EQ(probe_error([] { read_trace("{}"); }).code, errc::bad_config);
  // Domain validation runs on the parsed phases, so its own codes surface.
  CHECK_EQ(probe_error([] { read_trace(R"({"dim": 1, "phases": [], "samples": []})"); })
               .code,
           errc::nonzero_origin);
  CHECK_EQ(probe_error([] {
             read_trace(R"({"dim": "two", "phases": [], "samples": [], "meta": {}})");
           }).code,
           errc::bad_config);
  const std::string stray_sample = R"({
    "dim": 1,
    "phases": [{"j": 0, "t_start": 0.0, "t_end": 0.0}],
    "samples": [{"t": 0.0, "j": 5, "x": [1.0]}],
    "meta": {}
  })";
  CHECK_EQ(probe_error([&] { read_trace(stray_sample); }).code, errc::bad_config);
}

TEST_CASE("trace files save and load") {
  const auto path = temp_file("hyltl_trace_test.json");
  Trace trace{two_phase_arc(), {{"k", "v"}}};
  save_trace(trace, path.string());
  const Trace back = load_trace(path.string());
  CHECK_EQ(write_trace(back), write_trace(trace));
  std::filesystem::remove(path);

  CHECK_EQ(probe_error([] { load_trace("/nonexistent/trace.json"); }).code,
           errc::io_error);
  CHECK_EQ(probe_error([&] {
             save_trace(Trace{two_phase_arc(), {}}, "/nonexistent/dir/trace.json");
           }).code,
           errc::io_error);
}

TEST_CASE("csv export writes one row per sample in hybrid-time order") {
  std::ostringstream out;
  write_csv(two_phase_arc(), out);
  CHECK_EQ(out.str(),
           "t,j,x1,x2\n"
           "0,0,1,0\n"
           "0.5,0,0.875,-0.5\n"
           "1,0,0.5,-1\n"
           "1,1,0.5,0.5\n");

  const auto path = temp_file("hyltl_trace_test.csv");
  save_csv(two_phase_arc(), path.string());
  std::ifstream in(path);
  std::string first_line;
  std::getline(in, first_line);
  CHECK_EQ(first_line, "t,j,x1,x2");
  in.close();
  std::filesystem::remove(path);
}
