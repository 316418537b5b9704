#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "optomech/sde.hpp"

namespace optomech::io {

/// Shortest round-trip decimal; "nan"/"inf" for non-finite values.
std::string format_number(double value);

/// Comma-joined line with trailing newline.
std::string csv_line(const std::vector<std::string>& fields);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Binary trace dump: magic "OMTRACE1", then little-endian u64 var_count,
/// u64 step_count, u64 trajectory_count, f64 sample_interval, followed per
/// trajectory by step-major, var-minor (re, im) f64 pairs.
std::string encode_traces(const Traces& traces);
Traces decode_traces(std::string_view bytes);

}  // namespace optomech::io
