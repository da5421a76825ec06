#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "empiproc/io.hpp"

using namespace empiproc;
using namespace empiproc::io;
using generators::SamplePath;

namespace {

SamplePath awkward_path() {
  SamplePath p;
  p.n = 3;
  p.d = 2;
  // values that round badly in decimal
  p.values = {0.1, 1.0 / 3.0, 0x1.fffffffffffffp-1, 1e-300, 0.7, 5e-324};
  return p;
}

std::string temp_file(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("csv roundtrip is bit exact") {
  auto p = awkward_path();
  auto file = temp_file("io_test_path.csv");
  write_path_csv(p, file);
  auto back = read_path_csv(file);
  CHECK(back.n == p.n);
  CHECK(back.d == p.d);
  CHECK(back.values == p.values);

  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,x1,x2");
  std::remove(file.c_str());
}

TEST_CASE("binary roundtrip and magic") {
  auto p = awkward_path();
  auto file = temp_file("io_test_path.bin");
  write_path_binary(p, file);
  auto back = read_path_binary(file);
  CHECK(back.values == p.values);

  std::ifstream in(file, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "EPRC");

  CHECK_THROWS_AS((void)read_path_binary(temp_file("io_test_missing.bin")), std::runtime_error);
  auto junk = temp_file("io_test_junk.bin");
  std::ofstream(junk, std::ios::binary) << "not a path";
  CHECK_THROWS_AS((void)read_path_binary(junk), std::runtime_error);
  std::remove(file.c_str());
  std::remove(junk.c_str());
}

TEST_CASE("auto detection picks the right reader") {
  auto p = awkward_path();
  auto csv = temp_file("io_test_auto.csv");
  auto bin = temp_file("io_test_auto.bin");
  write_path_csv(p, csv);
  write_path_binary(p, bin);
  CHECK(read_path_auto(csv).values == p.values);
  CHECK(read_path_auto(bin).values == p.values);
  std::remove(csv.c_str());
  std::remove(bin.c_str());
}

TEST_CASE("sidecars carry the config hash") {
  auto artifact = temp_file("io_test_artifact.csv");
  std::ofstream(artifact) << "x\n";
  nlohmann::json config{{"generator", "iid"}, {"n", 128}};
  write_sidecar(artifact, {{"command", "simulate"}}, config);

  std::ifstream in(artifact + ".json");
  REQUIRE(in.good());
  auto meta = nlohmann::json::parse(in);
  CHECK(meta["command"] == "simulate");
  REQUIRE(meta.contains("config_hash"));
  auto first = meta["config_hash"].get<std::uint64_t>();
  CHECK(first == fnv1a(config.dump()));

  // same config, same hash; different config, different hash
  write_sidecar(artifact, {{"command", "simulate"}}, config);
  std::ifstream in2(artifact + ".json");
  CHECK(nlohmann::json::parse(in2)["config_hash"].get<std::uint64_t>() == first);

  config["n"] = 256;
  write_sidecar(artifact, {{"command", "simulate"}}, config);
  std::ifstream in3(artifact + ".json");
  CHECK(nlohmann::json::parse(in3)["config_hash"].get<std::uint64_t>() != first);

  std::remove(artifact.c_str());
  std::remove((artifact + ".json").c_str());
}

TEST_CASE("format_real survives the parse roundtrip") {
  for (Real x : {0.1, 1.0 / 3.0, -1e-300, 12345.6789, 5e-324, 0.0})
    CHECK(std::strtod(format_real(x).c_str(), nullptr) == x);
}
