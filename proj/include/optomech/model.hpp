#pragma once

#include <string_view>

#include "optomech/types.hpp"

namespace optomech {

/// Physical inputs of the driven cavity + movable mirror system.
///
/// Instances are only obtainable through make(), which enforces
/// omega_c, omega_m, gamma1, gamma2 > 0 and g >= 0. Values are immutable.
class ModelParams {
 public:
  static ModelParams make(double omega_c, double omega_m, double g,
                          double gamma1, double gamma2, Complex drive);

  double omega_c() const noexcept { return omega_c_; }
  double omega_m() const noexcept { return omega_m_; }
  double g() const noexcept { return g_; }
  double gamma1() const noexcept { return gamma1_; }
  double gamma2() const noexcept { return gamma2_; }
  Complex drive() const noexcept { return drive_; }

  /// Copy with one named field replaced (names as in the config file, plus
  /// drive_abs which rescales |E| keeping its phase). Result is re-validated.
  ModelParams with_field(std::string_view name, double value) const;
  double field(std::string_view name) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelParams(double omega_c, double omega_m, double g, double gamma1,
              double gamma2, Complex drive)
      : omega_c_(omega_c), omega_m_(omega_m), g_(g), gamma1_(gamma1),
        gamma2_(gamma2), drive_(drive) {}

  double omega_c_;
  double omega_m_;
  double g_;
  double gamma1_;
  double gamma2_;
  Complex drive_;
};

/// True for the field names accepted by ModelParams::with_field.
bool is_model_field(std::string_view name) noexcept;

struct GeometryParams {
  double cavity_length = 0.0;
  double mirror_mass = 0.0;
  double omega_c = 0.0;
  double omega_m = 0.0;
  double hbar = 1.0;
};

enum class CouplingForm {
  kAsPrinted,   // (omega_c / L) * (hbar / (2 m omega_m))
  kSquareRoot,  // (omega_c / L) * sqrt(hbar / (2 m omega_m))
};

/// Single-photon optomechanical coupling from cavity geometry.
/// Throws DomainError if any geometry field is not strictly positive.
double coupling_from_geometry(const GeometryParams& geo,
                              CouplingForm form = CouplingForm::kAsPrinted);

inline constexpr double kDefaultAdiabaticRatio = 10.0;

struct AdiabaticReport {
  double ratio = 0.0;  // gamma2 / gamma1
  double threshold = kDefaultAdiabaticRatio;
  bool adiabatic_ok = false;
};

/// Advisory check that the mirror is fast enough to be eliminated.
/// Boundary inclusive; never rejects valid parameters.
AdiabaticReport validate_adiabatic(const ModelParams& params,
                                   double ratio_threshold = kDefaultAdiabaticRatio);

}  // namespace optomech
