#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "corpus.hpp"
#include "qrgeom/io.hpp"

using namespace qrgeom;
using namespace qrgeom::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qrgeom_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run(const std::string& args) {
  const std::string cmd = std::string(QRGEOM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kTriangle = R"({"vertices":[{"id":"a","mass":1},{"id":"b","mass":1},{"id":"c","mass":2}],
  "edges":[{"u":"a","v":"b","len":1},{"u":"b","v":"c","len":2}]})";

}  // namespace

TEST(Io, SpaceRoundTrip) {
  for (const auto& s : corpus_spaces()) {
    const auto back = space_from_json(json::parse(space_to_json(*s.space).dump()));
    ASSERT_EQ(back->size(), s.space->size()) << s.name;
    for (std::size_t i = 0; i < back->size(); ++i) {
      EXPECT_EQ(back->id(i), s.space->id(i));
      EXPECT_EQ(back->mass(i), s.space->mass(i));
      for (std::size_t k = 0; k < back->size(); ++k) EXPECT_EQ(back->dist(i, k), s.space->dist(i, k));
    }
  }
  // explicit matrices survive too
  const auto p = gen_pullback_space(gen_cycle_cover(4, 2));
  const auto back = space_from_json(space_to_json(*p));
  EXPECT_FALSE(back->is_path_metric());
  for (std::size_t i = 0; i < p->size(); ++i)
    for (std::size_t k = 0; k < p->size(); ++k) EXPECT_EQ(back->dist(i, k), p->dist(i, k));
}

TEST(Io, ParsesPlainSpace) {
  const auto s = space_from_json(json::parse(kTriangle));
  EXPECT_EQ(s->size(), 3u);
  EXPECT_DOUBLE_EQ(s->dist(s->index("a"), s->index("c")), 3.0);
  EXPECT_TRUE(s->is_path_metric());
}

TEST(Io, RejectsUnknownAndMissingKeys) {
  auto j = json::parse(kTriangle);
  j["colour"] = 1;
  EXPECT_THROW(space_from_json(j), ValidationError);
  j = json::parse(kTriangle);
  j["vertices"][0]["weight"] = 2;
  EXPECT_THROW(space_from_json(j), ValidationError);
  j = json::parse(kTriangle);
  j["edges"][0].erase("len");
  EXPECT_THROW(space_from_json(j), ValidationError);
  j = json::parse(kTriangle);
  j["edges"][0]["v"] = "zz";
  EXPECT_THROW(space_from_json(j), ValidationError);
  j = json::parse(kTriangle);
  j["dist"] = json::array({json::array({0, 1})});
  EXPECT_THROW(space_from_json(j), ValidationError);
}

TEST(Io, MalformedJson) {
  const auto dir = scratch("malformed");
  write(dir / "bad.json", "{\"vertices\": [");
  EXPECT_THROW(load_space(dir / "bad.json"), ValidationError);
  fs::remove_all(dir);
}

TEST(Io, MapChecks) {
  const auto dir = scratch("map");
  write(dir / "s.json", kTriangle);
  write(dir / "ok.json", R"({"source":"s.json","target":"s.json","pairs":[["a","a"],["b","b"],["c","c"]]})");
  write(dir / "partial.json", R"({"source":"s.json","target":"s.json","pairs":[["a","a"],["b","b"]]})");
  write(dir / "twice.json", R"({"source":"s.json","target":"s.json","pairs":[["a","a"],["a","b"],["b","b"],["c","c"]]})");
  write(dir / "outside.json", R"({"source":"s.json","target":"s.json","pairs":[["a","q"],["b","b"],["c","c"]]})");
  const auto m = load_map(dir / "ok.json");
  EXPECT_EQ(m.map(2), 2u);
  for (const char* bad : {"partial.json", "twice.json", "outside.json"})
    EXPECT_THROW(load_map(dir / bad), ValidationError) << bad;
  fs::remove_all(dir);
}

TEST(Io, FamilyChecks) {
  const auto s = space_from_json(json::parse(kTriangle));
  EXPECT_EQ(family_from_json(*s, json::parse(R"({"paths":[["a","b","c"]]})")).paths.size(), 1u);
  EXPECT_THROW(family_from_json(*s, json::parse(R"({"paths":[["a","c"]]})")), ValidationError);
  EXPECT_THROW(family_from_json(*s, json::parse(R"({})")), ValidationError);
  EXPECT_THROW(family_from_json(*s, json::parse(R"({"paths":[],"extra":1})")), ValidationError);
  EXPECT_THROW(family_from_json(*s, json::parse(R"({"connect":{"E":["a"],"F":["a"]}})")), ValidationError);
}

TEST(Io, NonFiniteNumbersBecomeStrings) {
  EXPECT_EQ(jnum(kInf), json("inf"));
  EXPECT_EQ(jnum(std::nan("")), json("nan"));
  EXPECT_EQ(jnum(1.5), json(1.5));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string d = dir.string();
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 64);
  EXPECT_EQ(run("gen winding --k 2 --levels 1 --sectors 8 --bogus 1 --out " + d + "/w"), 64);
  EXPECT_EQ(run("validate " + d + "/missing.json --out " + d + "/v"), 64);

  write(dir / "asym.json", R"({"vertices":[{"id":"a","mass":1},{"id":"b","mass":1}],
    "edges":[{"u":"a","v":"b","len":1}], "dist":[[0,1],[2,0]]})");
  EXPECT_EQ(run("validate " + d + "/asym.json --out " + d + "/v"), 2);
  write(dir / "bad.json", "{");
  EXPECT_EQ(run("validate " + d + "/bad.json --out " + d + "/v"), 2);

  ASSERT_EQ(run("gen winding --k 2 --levels 2 --sectors 8 --out " + d + "/w"), 0);
  EXPECT_EQ(run("validate " + d + "/w/map.json --out " + d + "/v"), 0);
  EXPECT_EQ(run("pullback --map " + d + "/w/map.json --metric exact --out " + d + "/p"), 3);
  EXPECT_EQ(run("pullback --map " + d + "/w/map.json --metric lower --out " + d + "/p"), 0);
  EXPECT_TRUE(fs::exists(dir / "p" / "report.json"));
  fs::remove_all(dir);
}

TEST(Cli, ReportShape) {
  const auto dir = scratch("report");
  const std::string d = dir.string();
  ASSERT_EQ(run("gen cycle-cover --n 4 --m 2 --out " + d + "/c"), 0);
  ASSERT_EQ(run("--seed 3 measure --map " + d + "/c/map.json --out " + d + "/m"), 0);
  const auto r = load_json(dir / "m" / "report.json");
  EXPECT_EQ(r.at("schema_version"), kSchemaVersion);
  for (const char* k : {"command", "inputs", "results", "certificates", "files", "wall_time_s"})
    EXPECT_TRUE(r.contains(k)) << k;
  // every input is hashed
  for (const auto& [name, h] : r.at("inputs").items()) EXPECT_EQ(h.get<std::string>().size(), 64u) << name;
  fs::remove_all(dir);
}
