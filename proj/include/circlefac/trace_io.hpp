#pragma once

// Trace files: one JSON document holding the format version, the config
// echo, every stage record, an analysis section and a SHA-256 checksum of
// the canonical (compact) dump of everything else. Rationals and integers
// are strings ("p/q" or digits) so nothing is lost; derived reals are
// decimal strings. There is no timestamp, so equal runs give equal bytes.

#include "circlefac/construction.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace circlefac {

inline constexpr int kTraceVersion = 1;

struct TraceFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceIOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data);

/// Writes to a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// `analysis` is a JSON object text (or empty for none).
std::string serialize_trace(const ConstructionTrace& trace, const std::string& analysis = {});

struct LoadedTrace {
    ConstructionTrace trace;
    std::string analysis;  // JSON text, "{}" when absent
    /// checksum and generator_table.* results, computed while loading.
    std::vector<CheckResult> integrity;
    bool intact() const;
};

/// Parses, checks the checksum, rebuilds every generator from the config and
/// schedule and compares it exactly with the stored table, then rebuilds the
/// stage maps from the stored tables.
LoadedTrace parse_trace(const std::string& text);
LoadedTrace read_trace(const std::string& path);

}  // namespace circlefac
