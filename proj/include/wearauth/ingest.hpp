#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wearauth/types.hpp"

namespace wearauth::ingest {

// Column order of the recording CSV. Files start with this exact header
// line; a headerless file of data rows is also accepted.
inline constexpr const char* kCsvHeader = "t_a,x_a,y_a,z_a,t_g,x_g,y_g,z_g";

// Parses a recording CSV. Each data row holds the eight numeric columns
// above. Throws MalformedLine, NonMonotoneTimestamp, TimestampMisaligned
// (|t_a - t_g| above one frame period) or EmptyFile.
Recording parse_recording(const std::filesystem::path& path,
                          const std::string& user_id, double sample_rate_hz);

Recording parse_recording_stream(std::istream& in, const std::string& name,
                                 const std::string& user_id,
                                 double sample_rate_hz);

// Writes the CSV form of a recording. Numbers use shortest round-trip
// formatting, so parse_recording(write_recording(r)) reproduces r exactly.
void write_recording(const Recording& rec, const std::filesystem::path& path);
void write_recording_stream(const Recording& rec, std::ostream& out);

// Splits a recording into consecutive non-overlapping windows of
// sample_size frames; the trailing remainder is discarded. Throws
// SampleSizeTooSmall for sample_size < 2.
std::vector<Window> chunk(const Recording& rec, std::size_t sample_size);

}  // namespace wearauth::ingest
