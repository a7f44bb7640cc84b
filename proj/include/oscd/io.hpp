#pragma once

// File formats and serialization helpers. Floats are written with the
// shortest decimal form that round-trips the exact 64-bit value.

#include <string>
#include <vector>

#include "oscd/scoring.hpp"

namespace oscd {

std::string format_double(double v);
double parse_double(const std::string& s);

// Tool version + config fingerprint carried by every run artifact.
struct FileStamp {
    std::string tool_version;
    std::string config_fingerprint; // 16 hex digits

    std::string comment_line() const; // "# oscd <version> config=<fp>"
    bool empty() const { return tool_version.empty() && config_fingerprint.empty(); }
};

// Score table: tab-separated, one row per sample.
//   # oscd score table v1; orientation: larger = more unknown
//   sample_id  split  group  category  predicted_class  <method...>
void save_score_table(const ScoreTable& table, const std::string& path,
                      const FileStamp& stamp = {});
ScoreTable load_score_table(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace oscd
