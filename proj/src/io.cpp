#include "empiproc/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace empiproc::io {

std::string format_real(Real x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_path_csv(const SamplePath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out << "k";
  for (std::size_t i = 0; i < path.d; ++i) out << ",x" << (i + 1);
  out << "\n";
  for (std::size_t k = 0; k < path.n; ++k) {
    out << (k + 1);
    for (std::size_t i = 0; i < path.d; ++i) out << ',' << format_real(path.at(k, i));
    out << "\n";
  }
}

SamplePath read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty path file " + file);
  std::size_t d = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (d == 0 || line.rfind("k,", 0) != 0)
    throw std::runtime_error("malformed path header in " + file);
  SamplePath path;
  path.d = d;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // index column
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("short row in " + file);
      // strtod, not stod: stod raises on subnormals via ERANGE
      path.values.push_back(std::strtod(cell.c_str(), nullptr));
    }
    ++path.n;
  }
  return path;
}

void write_path_binary(const SamplePath& path, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file);
  out.write("EPRC", 4);
  std::uint32_t n = static_cast<std::uint32_t>(path.n);
  std::uint32_t d = static_cast<std::uint32_t>(path.d);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(path.values.data()),
            static_cast<std::streamsize>(path.values.size() * sizeof(Real)));
}

SamplePath read_path_binary(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "EPRC", 4) != 0)
    throw std::runtime_error("not an EPRC file: " + file);
  std::uint32_t n = 0, d = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  if (!in || d == 0) throw std::runtime_error("truncated EPRC header in " + file);
  SamplePath path;
  path.n = n;
  path.d = d;
  path.values.resize(static_cast<std::size_t>(n) * d);
  in.read(reinterpret_cast<char*>(path.values.data()),
          static_cast<std::streamsize>(path.values.size() * sizeof(Real)));
  if (!in) throw std::runtime_error("truncated EPRC payload in " + file);
  return path;
}

SamplePath read_path_auto(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file);
  char magic[4] = {};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, "EPRC", 4) == 0) return read_path_binary(file);
  return read_path_csv(file);
}

void write_field_csv(const EmpiricalProcessField& field, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  std::size_t d = field.grid->dimension();
  for (std::size_t i = 0; i < d; ++i) out << "t" << (i + 1) << ',';
  out << "Fn,F,Un\n";
  for (std::size_t vtx = 0; vtx < field.grid->vertex_count(); ++vtx) {
    Point t = field.grid->vertex(vtx);
    for (std::size_t i = 0; i < d; ++i) out << format_real(t[i]) << ',';
    out << format_real(field.Fn.at(vtx)) << ',' << format_real(field.F.at(vtx)) << ','
        << format_real(field.Un.at(vtx)) << "\n";
  }
}

void write_gamma_csv(const limit::LimitModel& model, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out << "row,col,value\n";
  std::size_t v = model.grid->vertex_count();
  for (std::size_t s = 0; s < v; ++s)
    for (std::size_t t = 0; t < v; ++t)
      out << s << ',' << t << ',' << format_real(model.at(s, t)) << "\n";
}

void write_sidecar(const std::string& artifact_file, nlohmann::json meta,
                   const nlohmann::json& config) {
  meta["config_hash"] = fnv1a(config.dump());
  std::ofstream out(artifact_file + ".json");
  if (!out) throw std::runtime_error("cannot open " + artifact_file + ".json");
  out << meta.dump(2) << "\n";
}

}  // namespace empiproc::io
