#include "kvwave/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kvwave {

void Material::validate() const {
  if (!(m0 > 0.0)) {
    throw std::invalid_argument("material: m0 must be > 0 (A1), got " + std::to_string(m0));
  }
  if (!(m1 >= 0.0)) {
    throw std::invalid_argument("material: m1 must be >= 0 (A1), got " + std::to_string(m1));
  }
  if (!(gamma >= 1.0)) {
    throw std::invalid_argument("material: gamma must be >= 1 (A1), got " +
                                std::to_string(gamma));
  }
}

void Coupling::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw std::invalid_argument("coupling: a and b must be nonnegative");
  }
  if (n < 1) {
    throw std::invalid_argument("coupling: dimension must be >= 1");
  }
  if (!admissible_p(n, p)) {
    std::ostringstream os;
    os << "coupling: p = " << p << " is not admissible for n = " << n << "; require ";
    if (n <= 2) {
      os << "-1 < p";
    } else {
      os << "-1 < p <= (3-n)/(n-2) = " << (3.0 - n) / (n - 2.0);
    }
    throw std::invalid_argument(os.str());
  }
}

double kirchhoff_M(double s, const Material& mat) {
  if (s < 0.0) {
    throw std::domain_error("kirchhoff_M: argument must be nonnegative");
  }
  if (mat.m1 == 0.0) return mat.m0;
  return mat.m0 + mat.m1 * std::pow(s, mat.gamma);
}

bool admissible_p(int n, double p) {
  if (!(p > -1.0)) return false;
  if (n <= 2) return true;
  return p <= (3.0 - n) / (n - 2.0);
}

double signed_pow(double x, double q) {
  if (x == 0.0) return 0.0;
  const double m = std::pow(std::abs(x), q);
  return x < 0.0 ? -m : m;
}

double coupling_f1(double u, double v, const Coupling& c) {
  const double p = c.p;
  return c.a * signed_pow(u + v, 2.0 * p + 3.0) +
         c.b * (signed_pow(u, p + 1.0) * std::pow(std::abs(v), p + 2.0));
}

double coupling_f2(double u, double v, const Coupling& c) {
  const double p = c.p;
  return c.a * signed_pow(u + v, 2.0 * p + 3.0) +
         c.b * (std::pow(std::abs(u), p + 2.0) * signed_pow(v, p + 1.0));
}

double coupling_F(double u, double v, const Coupling& c) {
  const double q = c.p + 2.0;
  return (c.a * std::pow(std::abs(u + v), 2.0 * q) + 2.0 * c.b * std::pow(std::abs(u * v), q)) /
         (2.0 * q);
}

}  // namespace kvwave
