#include "vibgate/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vibgate/errors.hpp"
#include "vibgate/units.hpp"

namespace vibgate {

LaserField LaserField::zeros(double dt, double duration_fs) {
  if (!(dt > 0.0) || !(duration_fs > 0.0)) throw ParameterError("dt and duration must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(duration_fs / dt));
  return LaserField(dt, std::vector<double>(std::max<std::size_t>(n, 1), 0.0));
}

double LaserField::peak() const noexcept {
  double p = 0.0;
  for (double x : samples) p = std::max(p, std::abs(x));
  return p;
}

double LaserField::fluence() const noexcept {
  double s = 0.0;
  for (double x : samples) s += x * x;
  return s * units::fs_to_au(dt_fs);
}

void LaserField::validate(double guard) const {
  if (samples.empty()) throw ParameterError("laser field has no samples");
  if (!(dt_fs > 0.0) || !std::isfinite(dt_fs)) throw ParameterError("laser field dt must be > 0");
  if (!std::all_of(samples.begin(), samples.end(), [](double x) { return std::isfinite(x); }))
    throw ParameterError("laser field samples must be finite");
  if (peak() > guard)
    throw ParameterError("peak field " + std::to_string(peak()) +
                         " a.u. exceeds the ionization guard " + std::to_string(guard));
}

std::vector<std::string> LaserField::warnings() const {
  std::vector<std::string> out;
  if (peak() > kStrongFieldWarning)
    out.push_back("peak field " + std::to_string(peak()) + " a.u. is above " +
                  std::to_string(kStrongFieldWarning) + " a.u.");
  return out;
}

void write_pulse_csv(std::ostream& out, const LaserField& field) {
  out << "t_fs,field_au\n";
  char line[96];
  for (std::size_t j = 0; j < field.samples.size(); ++j) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", field.time_fs(j), field.samples[j]);
    out << line;
  }
}

void write_pulse_csv(const std::filesystem::path& path, const LaserField& field) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_pulse_csv(out, field);
}

namespace {

double parse_number(std::string_view text, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError("malformed number '" + std::string(text) + "'", line);
  return v;
}

}  // namespace

LaserField read_pulse_csv(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  if (!std::getline(in, text)) throw ParseError("empty pulse file", 1);
  ++line_no;
  std::vector<double> times, values;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty() || text == "\r") continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ParseError("expected two columns", line_no);
    const std::string_view sv(text);
    times.push_back(parse_number(sv.substr(0, comma), line_no));
    values.push_back(parse_number(sv.substr(comma + 1), line_no));
  }
  if (values.empty()) throw ParseError("pulse file has no samples", line_no);
  double dt = 0.0;
  if (times.size() >= 2) {
    dt = times[1] - times[0];
    if (!(dt > 0.0)) throw ParseError("time column must increase", 3);
    for (std::size_t j = 2; j < times.size(); ++j) {
      if (std::abs((times[j] - times[j - 1]) - dt) > 1e-6 * dt)
        throw ParseError("time column is not uniformly spaced", j + 2);
    }
  } else {
    dt = 2.0 * times[0];
    if (!(dt > 0.0)) throw ParseError("cannot infer the time step from one sample", 2);
  }
  return LaserField(dt, std::move(values));
}

LaserField read_pulse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_pulse_csv(in);
}

}  // namespace vibgate
