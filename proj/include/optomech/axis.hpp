#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "optomech/model.hpp"

namespace optomech {

/// Grid over one ModelParams field (or drive_abs).
struct AxisSpec {
  std::string field;
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
  bool log_scale = false;

  /// Parses "field:start:stop:count[:log]".
  static AxisSpec parse(std::string_view text);
  static AxisSpec single(std::string field, double value);

  /// Grid points; throws DomainError for unknown fields or non-finite grids.
  std::vector<double> values() const;
};

}  // namespace optomech
