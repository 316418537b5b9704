#include "optomech/axis.hpp"

#include <charconv>
#include <cmath>

namespace optomech {
namespace {

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("axis " + std::string(what) + ": cannot parse '" +
                      std::string(s) + "'");
  }
  return v;
}

}  // namespace

AxisSpec AxisSpec::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  size_t pos = 0;
  while (true) {
    const size_t next = text.find(':', pos);
    parts.push_back(text.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (parts.size() != 4 && parts.size() != 5) {
    throw DomainError("axis spec must be field:start:stop:count[:log], got '" +
                      std::string(text) + "'");
  }
  AxisSpec a;
  a.field = std::string(parts[0]);
  a.start = parse_double(parts[1], "start");
  a.stop = parse_double(parts[2], "stop");
  const double count = parse_double(parts[3], "count");
  if (count < 1 || count != std::floor(count) || count > 1e7) {
    throw DomainError("axis count must be a positive integer");
  }
  a.count = static_cast<int>(count);
  if (parts.size() == 5) {
    if (parts[4] == "log") {
      a.log_scale = true;
    } else if (parts[4] != "lin") {
      throw DomainError("axis scale must be 'lin' or 'log'");
    }
  }
  a.values();
  return a;
}

AxisSpec AxisSpec::single(std::string field, double value) {
  return AxisSpec{std::move(field), value, value, 1, false};
}

std::vector<double> AxisSpec::values() const {
  if (!is_model_field(field)) {
    throw DomainError("axis over non-numeric or unknown field '" + field + "'");
  }
  if (!std::isfinite(start) || !std::isfinite(stop)) {
    throw DomainError("axis bounds must be finite");
  }
  if (log_scale && (start <= 0.0 || stop <= 0.0)) {
    throw DomainError("log axis needs positive bounds");
  }
  std::vector<double> v(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    v[static_cast<size_t>(i)] =
        log_scale ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                  : start + t * (stop - start);
  }
  if (count > 1) {
    v.front() = start;
    v.back() = stop;
  }
  return v;
}

}  // namespace optomech
