#pragma once

/// @file model.hpp
/// @brief Scalar ingredients of the coupled Kirchhoff system: the stiffness
/// law M(s), the coupling nonlinearities f1, f2 and their potential F.

namespace kvwave {

/// Stiffness law M(s) = m0 + m1 * s^gamma.
struct Material {
  double m0 = 1.0;
  double m1 = 0.0;
  double gamma = 1.0;

  /// Throws std::invalid_argument unless m0 > 0, m1 >= 0, gamma >= 1.
  void validate() const;

  friend bool operator==(const Material&, const Material&) = default;
};

/// Power-type coupling between the two components.
///
/// f1(u,v) = a|u+v|^{2(p+1)}(u+v) + b|u|^p u |v|^{p+2}
/// f2(u,v) = a|u+v|^{2(p+1)}(u+v) + b|u|^{p+2} |v|^p v
/// F(u,v)  = (a|u+v|^{2(p+2)} + 2b|uv|^{p+2}) / (2(p+2))
///
/// a = b = 0 is accepted and switches the coupling off.
struct Coupling {
  double a = 1.0;
  double b = 1.0;
  double p = 0.0;
  int n = 1;

  /// Throws std::invalid_argument when a, b < 0 or p is not admissible for n.
  void validate() const;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// M(s); throws std::domain_error for s < 0.
double kirchhoff_M(double s, const Material& mat);

/// Exponent range for which the coupling is well posed in dimension n.
bool admissible_p(int n, double p);

/// sign(x)|x|^q, the real reading of |x|^{q-1} x.
double signed_pow(double x, double q);

double coupling_f1(double u, double v, const Coupling& c);
double coupling_f2(double u, double v, const Coupling& c);
double coupling_F(double u, double v, const Coupling& c);

}  // namespace kvwave
