#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// CSV emission with stable formatting (reruns must be byte-identical),
// SHA-256 digests, and the JSON run manifest written next to every scan
// or report output.

namespace twistlab {

inline constexpr const char* kVersionString = "twistlab-0.1.0";

// shortest round-trip-safe decimal form, stable across runs
std::string format_double(double v);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

struct RunManifest {
  std::string command_line;
  std::string subcommand;
  std::map<std::string, std::string> config;  // flag snapshot
  std::vector<std::string> output_files;      // digests filled on write
  std::string version = kVersionString;
};

// Writes the manifest as JSON (sorted keys; sha256 per output file).
void write_manifest(const RunManifest& manifest, const std::string& path);

// Environment-provided cache directory for coefficient tables
// (TWISTLAB_CACHE_DIR); empty when unset.
std::string cache_dir_from_env();

}  // namespace twistlab
