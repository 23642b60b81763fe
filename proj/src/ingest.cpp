#include "wearauth/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "wearauth/errors.hpp"

namespace wearauth::ingest {

namespace {

bool parse_field(std::string_view field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

Recording parse_recording_stream(std::istream& in, const std::string& name,
                                 const std::string& user_id,
                                 double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) {
    throw Error("sample rate must be positive");
  }
  Recording rec;
  rec.user_id = user_id;
  rec.sample_rate_hz = sample_rate_hz;
  const double period_ms = 1000.0 / sample_rate_hz;

  std::string line;
  std::size_t line_no = 0;
  double prev_ta = -std::numeric_limits<double>::infinity();
  double prev_tg = prev_ta;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == kCsvHeader) continue;

    double fields[8];
    std::string_view rest(line);
    for (int i = 0; i < 8; ++i) {
      const bool last = (i == 7);
      const std::size_t comma = rest.find(',');
      if (last != (comma == std::string_view::npos)) {
        throw MalformedLine(line_no, "expected 8 comma-separated fields");
      }
      const std::string_view field =
          last ? rest : rest.substr(0, comma);
      if (!parse_field(field, fields[i])) {
        throw MalformedLine(line_no, "field " + std::to_string(i + 1) +
                                         " is not a finite number");
      }
      if (!last) rest.remove_prefix(comma + 1);
    }

    SensorFrame f{fields[0], fields[1], fields[2], fields[3],
                  fields[4], fields[5], fields[6], fields[7]};
    if (f.t_a < prev_ta || f.t_g < prev_tg) throw NonMonotoneTimestamp(line_no);
    const double skew = std::fabs(f.t_a - f.t_g);
    if (skew > period_ms) throw TimestampMisaligned(line_no, skew);
    prev_ta = f.t_a;
    prev_tg = f.t_g;
    rec.frames.push_back(f);
  }

  if (rec.frames.empty()) throw EmptyFile(name);
  return rec;
}

Recording parse_recording(const std::filesystem::path& path,
                          const std::string& user_id, double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_recording_stream(in, path.string(), user_id, sample_rate_hz);
}

void write_recording_stream(const Recording& rec, std::ostream& out) {
  std::string buf;
  buf.reserve(rec.frames.size() * 48 + 64);
  buf += kCsvHeader;
  buf += '\n';
  for (const SensorFrame& f : rec.frames) {
    append_number(buf, f.t_a);
    buf += ',';
    append_number(buf, f.x_a);
    buf += ',';
    append_number(buf, f.y_a);
    buf += ',';
    append_number(buf, f.z_a);
    buf += ',';
    append_number(buf, f.t_g);
    buf += ',';
    append_number(buf, f.x_g);
    buf += ',';
    append_number(buf, f.y_g);
    buf += ',';
    append_number(buf, f.z_g);
    buf += '\n';
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_recording(const Recording& rec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_recording_stream(rec, out);
}

std::vector<Window> chunk(const Recording& rec, std::size_t sample_size) {
  if (sample_size < 2) throw SampleSizeTooSmall(sample_size);
  const std::size_t n_windows = rec.frames.size() / sample_size;
  std::vector<Window> windows;
  windows.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    Window win;
    win.user_id = rec.user_id;
    win.sample_size = sample_size;
    win.sample_rate_hz = rec.sample_rate_hz;
    const auto first = rec.frames.begin() + static_cast<std::ptrdiff_t>(w * sample_size);
    win.frames.assign(first, first + static_cast<std::ptrdiff_t>(sample_size));
    win.start_ts = win.frames.front().t_a;
    win.end_ts = win.frames.back().t_a;
    windows.push_back(std::move(win));
  }
  return windows;
}

}  // namespace wearauth::ingest
