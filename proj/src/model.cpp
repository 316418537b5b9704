#include "optomech/model.hpp"

#include <array>
#include <cmath>
#include <string>

namespace optomech {
namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw DomainError(std::string(name) + " must be finite and > 0, got " +
                      std::to_string(value));
  }
}

constexpr std::array<std::string_view, 8> kFields = {
    "omega_c", "omega_m", "g", "gamma1", "gamma2",
    "drive_re", "drive_im", "drive_abs"};

}  // namespace

ModelParams ModelParams::make(double omega_c, double omega_m, double g,
                              double gamma1, double gamma2, Complex drive) {
  require_positive(omega_c, "omega_c");
  require_positive(omega_m, "omega_m");
  require_positive(gamma1, "gamma1");
  require_positive(gamma2, "gamma2");
  if (!std::isfinite(g) || g < 0.0) {
    throw DomainError("g must be finite and >= 0, got " + std::to_string(g));
  }
  if (!std::isfinite(drive.real()) || !std::isfinite(drive.imag())) {
    throw DomainError("drive must be finite");
  }
  return ModelParams(omega_c, omega_m, g, gamma1, gamma2, drive);
}

bool is_model_field(std::string_view name) noexcept {
  for (auto f : kFields) {
    if (f == name) return true;
  }
  return false;
}

double ModelParams::field(std::string_view name) const {
  if (name == "omega_c") return omega_c_;
  if (name == "omega_m") return omega_m_;
  if (name == "g") return g_;
  if (name == "gamma1") return gamma1_;
  if (name == "gamma2") return gamma2_;
  if (name == "drive_re") return drive_.real();
  if (name == "drive_im") return drive_.imag();
  if (name == "drive_abs") return std::abs(drive_);
  throw DomainError("unknown parameter field '" + std::string(name) + "'");
}

ModelParams ModelParams::with_field(std::string_view name, double value) const {
  double wc = omega_c_, wm = omega_m_, g = g_, g1 = gamma1_, g2 = gamma2_;
  Complex e = drive_;
  if (name == "omega_c") {
    wc = value;
  } else if (name == "omega_m") {
    wm = value;
  } else if (name == "g") {
    g = value;
  } else if (name == "gamma1") {
    g1 = value;
  } else if (name == "gamma2") {
    g2 = value;
  } else if (name == "drive_re") {
    e = {value, e.imag()};
  } else if (name == "drive_im") {
    e = {e.real(), value};
  } else if (name == "drive_abs") {
    if (!(value >= 0.0)) throw DomainError("drive_abs must be >= 0");
    // zero drive has no phase; sweeping up from it uses a real drive
    const double phase = std::abs(e) > 0.0 ? std::arg(e) : 0.0;
    e = std::polar(value, phase);
  } else {
    throw DomainError("unknown parameter field '" + std::string(name) + "'");
  }
  return make(wc, wm, g, g1, g2, e);
}

double coupling_from_geometry(const GeometryParams& geo, CouplingForm form) {
  require_positive(geo.cavity_length, "cavity_length");
  require_positive(geo.mirror_mass, "mirror_mass");
  require_positive(geo.omega_c, "omega_c");
  require_positive(geo.omega_m, "omega_m");
  require_positive(geo.hbar, "hbar");
  const double zpf = geo.hbar / (2.0 * geo.mirror_mass * geo.omega_m);
  const double scale = geo.omega_c / geo.cavity_length;
  return form == CouplingForm::kSquareRoot ? scale * std::sqrt(zpf) : scale * zpf;
}

AdiabaticReport validate_adiabatic(const ModelParams& params,
                                   double ratio_threshold) {
  require_positive(ratio_threshold, "ratio_threshold");
  AdiabaticReport r;
  r.ratio = params.gamma2() / params.gamma1();
  r.threshold = ratio_threshold;
  r.adiabatic_ok = r.ratio >= ratio_threshold;
  return r;
}

}  // namespace optomech
