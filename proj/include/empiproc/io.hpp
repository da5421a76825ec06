#pragma once

#include <string>

#include <json.hpp>

#include "empiproc/empirical.hpp"
#include "empiproc/generators.hpp"
#include "empiproc/limit.hpp"

namespace empiproc::io {

using empirical::EmpiricalProcessField;
using generators::SamplePath;

/// CSV with header k,x1..xd and 17 significant digits.
void write_path_csv(const SamplePath& path, const std::string& file);
SamplePath read_path_csv(const std::string& file);

/// Little-endian binary: magic "EPRC", u32 n, u32 d, f64 row-major values.
void write_path_binary(const SamplePath& path, const std::string& file);
SamplePath read_path_binary(const std::string& file);

SamplePath read_path_auto(const std::string& file);

/// Columns: vertex coordinates, Fn, F, Un.
void write_field_csv(const EmpiricalProcessField& field, const std::string& file);

/// (row, col, value) triples of the repaired covariance.
void write_gamma_csv(const limit::LimitModel& model, const std::string& file);

/// JSON metadata next to an artifact, at file + ".json"; a config_hash field
/// is added from the serialized config.
void write_sidecar(const std::string& artifact_file, nlohmann::json meta,
                   const nlohmann::json& config);

std::string format_real(Real x);

}  // namespace empiproc::io
