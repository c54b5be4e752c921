#include "kvwave/memory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kvwave {

PronyKernel::PronyKernel(std::vector<PronyTerm> terms) : terms_(std::move(terms)) {
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& t = terms_[j];
    if (!(t.a >= 0.0) || !std::isfinite(t.a)) {
      throw std::invalid_argument("kernel term " + std::to_string(j) +
                                  ": weight a must be finite and >= 0 (g >= 0)");
    }
    if (!(t.b > 0.0) || !std::isfinite(t.b)) {
      throw std::invalid_argument("kernel term " + std::to_string(j) +
                                  ": rate b must be finite and > 0 (g' <= 0)");
    }
  }
}

std::vector<PronyTerm> PronyKernel::derivative_terms() const {
  std::vector<PronyTerm> d;
  d.reserve(terms_.size());
  for (const auto& t : terms_) d.push_back({-t.a * t.b, t.b});
  return d;
}

double kernel_eval(std::span<const PronyTerm> terms, double t) {
  if (t < 0.0) throw std::domain_error("kernel_eval: t must be nonnegative");
  double s = 0.0;
  for (const auto& term : terms) s += term.a * std::exp(-term.b * t);
  return s;
}

double kernel_eval(const PronyKernel& k, double t) { return kernel_eval(k.terms(), t); }

double kernel_derivative(const PronyKernel& k, double t) {
  return kernel_eval(k.derivative_terms(), t);
}

double kernel_integral(const PronyKernel& k, double t) {
  if (t < 0.0) throw std::domain_error("kernel_integral: t must be nonnegative");
  double s = 0.0;
  for (const auto& term : k.terms()) s += term.a * (-std::expm1(-term.b * t)) / term.b;
  return s;
}

double kernel_mass(const PronyKernel& k) {
  double s = 0.0;
  for (const auto& term : k.terms()) s += term.a / term.b;
  return s;
}

StiffnessConstants check_admissible(const PronyKernel& g1, const PronyKernel& g2,
                                    const Material& mat) {
  StiffnessConstants c;
  c.k1 = mat.m0 - kernel_mass(g1);
  c.k2 = mat.m0 - kernel_mass(g2);
  for (int i = 0; i < 2; ++i) {
    const double ki = i == 0 ? c.k1 : c.k2;
    if (!(ki > 0.0)) {
      std::ostringstream os;
      os << "kernel mass exceeds base stiffness: k" << (i + 1) << " = m0 - int g" << (i + 1)
         << " = " << ki << " must be > 0";
      throw std::invalid_argument(os.str());
    }
  }
  c.k = std::min(c.k1, c.k2);
  return c;
}

std::string to_string(MemoryMode mode) { return mode == MemoryMode::direct ? "direct" : "prony"; }

MemoryMode memory_mode_from_string(const std::string& s) {
  if (s == "direct") return MemoryMode::direct;
  if (s == "prony") return MemoryMode::prony;
  throw std::invalid_argument("memory mode must be \"direct\" or \"prony\", got \"" + s + "\"");
}

PronyStepWeights prony_step_weights(double rate, double dt) {
  const double z = rate * dt;
  PronyStepWeights w;
  w.decay = std::exp(-z);
  double phi1 = 0.0;  // (1 - e^{-z}) / z
  double phi2 = 0.0;  // (1 - e^{-z}(1 + z)) / z^2
  if (z < 1e-3) {
    // Series through z^4; the dropped terms are O(z^5).
    phi1 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0;
    phi2 = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0 + z * z * z * z / 144.0;
  } else {
    phi1 = -std::expm1(-z) / z;
    phi2 = (-std::expm1(-z) - z * w.decay) / (z * z);
  }
  w.w_old = phi2;
  w.w_new = phi1 - phi2;
  return w;
}

HistoryBuffer::HistoryBuffer(MemoryMode mode, std::size_t width, double dt,
                             std::span<const PronyTerm> terms)
    : mode_(mode), width_(width), dt_(dt), terms_(terms.begin(), terms.end()) {
  if (width == 0) throw std::invalid_argument("HistoryBuffer: width must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("HistoryBuffer: dt must be positive");
  if (mode_ == MemoryMode::prony) {
    for (const auto& t : terms_) {
      if (!(t.b > 0.0)) throw std::invalid_argument("HistoryBuffer: rates must be positive");
      weights_.push_back(prony_step_weights(t.b, dt));
    }
    acc_.assign(terms_.size() * width_, 0.0);
    last_.assign(width_, 0.0);
  }
}

void HistoryBuffer::push(std::span<const double> x) {
  if (x.size() != width_) throw std::invalid_argument("HistoryBuffer::push: width mismatch");
  if (mode_ == MemoryMode::direct) {
    samples_.insert(samples_.end(), x.begin(), x.end());
    ++levels_;
    return;
  }
  if (levels_ > 0) {
    const std::vector<double> old = last_;
    convolve_prony_step(*this, x, old, dt_);
  } else {
    std::copy(x.begin(), x.end(), last_.begin());
    levels_ = 1;
  }
}

std::span<const double> HistoryBuffer::snapshot(std::size_t level) const {
  if (mode_ != MemoryMode::direct) throw std::logic_error("snapshot: buffer is in prony mode");
  if (level >= levels_) throw std::out_of_range("snapshot: level not stored");
  return std::span<const double>(samples_).subspan(level * width_, width_);
}

std::span<const double> HistoryBuffer::accumulator(std::size_t term) const {
  if (mode_ != MemoryMode::prony) throw std::logic_error("accumulator: buffer is in direct mode");
  return std::span<const double>(acc_).subspan(term * width_, width_);
}

void convolve_prony_step(HistoryBuffer& state, std::span<const double> x_new,
                         std::span<const double> x_old, double dt) {
  if (state.mode_ != MemoryMode::prony) {
    throw std::logic_error("convolve_prony_step: buffer is in direct mode");
  }
  if (x_new.size() != state.width_ || x_old.size() != state.width_) {
    throw std::invalid_argument("convolve_prony_step: width mismatch");
  }
  if (std::abs(dt - state.dt_) > 1e-15 * state.dt_) {
    throw std::invalid_argument("convolve_prony_step: dt differs from the buffer's step");
  }
  const std::size_t w = state.width_;
  for (std::size_t j = 0; j < state.terms_.size(); ++j) {
    const auto& sw = state.weights_[j];
    double* a = state.acc_.data() + j * w;
    for (std::size_t i = 0; i < w; ++i) {
      a[i] = sw.decay * a[i] + dt * (sw.w_old * x_old[i] + sw.w_new * x_new[i]);
    }
  }
  std::copy(x_new.begin(), x_new.end(), state.last_.begin());
  ++state.levels_;
}

std::vector<double> prony_value(const HistoryBuffer& state, std::span<const PronyTerm> weights) {
  const auto terms = state.terms();
  if (weights.size() != terms.size()) {
    throw std::invalid_argument("prony_value: weights do not match the buffer's terms");
  }
  std::vector<double> out(state.width(), 0.0);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (weights[j].b != terms[j].b) {
      throw std::invalid_argument("prony_value: rate mismatch");
    }
    const auto acc = state.accumulator(j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[j].a * acc[i];
  }
  return out;
}

std::vector<std::vector<double>> convolve_direct(
    const HistoryBuffer& history, std::span<const std::span<const PronyTerm>> kernels,
    double dt, std::size_t n) {
  if (history.mode() != MemoryMode::direct) {
    throw std::logic_error("convolve_direct: buffer is in prony mode");
  }
  std::vector<std::vector<double>> out(kernels.size(),
                                       std::vector<double>(history.width(), 0.0));
  if (n == 0) return out;
  if (history.levels() < n + 1) {
    throw std::invalid_argument("convolve_direct: history holds " +
                                std::to_string(history.levels()) + " samples, need " +
                                std::to_string(n + 1));
  }
  const std::size_t w = history.width();
  std::vector<double> coef(kernels.size());
  for (std::size_t j = 0; j <= n; ++j) {
    const double tw = (j == 0 || j == n) ? 0.5 * dt : dt;
    const double lag = static_cast<double>(n - j) * dt;
    for (std::size_t k = 0; k < kernels.size(); ++k) coef[k] = tw * kernel_eval(kernels[k], lag);
    const auto x = history.snapshot(j);
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      double* o = out[k].data();
      const double c = coef[k];
      for (std::size_t i = 0; i < w; ++i) o[i] += c * x[i];
    }
  }
  return out;
}

std::vector<double> convolve_direct(const HistoryBuffer& history,
                                    std::span<const PronyTerm> kernel, double dt,
                                    std::size_t n) {
  const std::span<const PronyTerm> one[] = {kernel};
  return std::move(convolve_direct(history, one, dt, n).front());
}

double trapezoid_kernel_mass(std::span<const PronyTerm> kernel, double dt, std::size_t n) {
  if (n == 0) return 0.0;
  double s = 0.5 * (kernel_eval(kernel, 0.0) + kernel_eval(kernel, n * dt));
  for (std::size_t j = 1; j < n; ++j) s += kernel_eval(kernel, j * dt);
  return s * dt;
}

double clamp_nonnegative(double x, const char* what) {
  if (x >= 0.0) return x;
  if (x > -1e-12) return 0.0;
  std::ostringstream os;
  os << what << " is negative (" << x << "); the functional is nonnegative by construction";
  throw std::runtime_error(os.str());
}

FieldMemory::FieldMemory(const PronyKernel& kernel, MemoryMode mode, const Grid& grid, double dt)
    : kernel_(kernel),
      derivative_(kernel.derivative_terms()),
      grid_(grid),
      dt_(dt),
      lap_(mode, grid.size(), dt, kernel.terms()),
      grad_sq_(mode, 1, dt, kernel.terms()) {}

void FieldMemory::push(const Field& w, const Field& lap_w) {
  latest_grad_sq_ = std::max(0.0, -l2_inner(lap_w, w));
  lap_.push(lap_w.values());
  grad_sq_.push(latest_grad_sq_);
}

MemoryTerms FieldMemory::evaluate(const Field& w) const {
  if (levels() == 0) throw std::logic_error("FieldMemory::evaluate: empty history");
  const std::size_t n = levels() - 1;
  MemoryTerms out;
  out.conv_lap = Field(grid_);
  if (kernel_.empty() || n == 0) return out;

  std::vector<double> conv_g, conv_gp;
  double sq_g = 0.0, sq_gp = 0.0, mass_g = 0.0, mass_gp = 0.0;
  const double grad_latest = latest_grad_sq_;
  if (lap_.mode() == MemoryMode::direct) {
    const std::span<const PronyTerm> ks[] = {kernel_.terms(), derivative_};
    auto field_conv = convolve_direct(lap_, ks, dt_, n);
    auto scalar_conv = convolve_direct(grad_sq_, ks, dt_, n);
    conv_g = std::move(field_conv[0]);
    conv_gp = std::move(field_conv[1]);
    sq_g = scalar_conv[0][0];
    sq_gp = scalar_conv[1][0];
    mass_g = trapezoid_kernel_mass(kernel_.terms(), dt_, n);
    mass_gp = trapezoid_kernel_mass(derivative_, dt_, n);
  } else {
    conv_g = prony_value(lap_, kernel_.terms());
    conv_gp = prony_value(lap_, derivative_);
    sq_g = prony_value(grad_sq_, kernel_.terms())[0];
    sq_gp = prony_value(grad_sq_, derivative_)[0];
    // Piecewise-linear exactness on constants gives the closed form.
    const double t = n * dt_;
    mass_g = kernel_integral(kernel_, t);
    mass_gp = kernel_eval(kernel_.terms(), t) - kernel_eval(kernel_.terms(), 0.0);
  }

  const double cross_g = l2_inner(w.grid(), w.values(), conv_g);
  const double cross_gp = l2_inner(w.grid(), w.values(), conv_gp);
  const double g_circ = mass_g * grad_latest + sq_g + 2.0 * cross_g;
  const double gp_circ = mass_gp * grad_latest + sq_gp + 2.0 * cross_gp;
  const double scale = std::max(1.0, mass_g * grad_latest + sq_g);
  const double scale_p = std::max(1.0, -(mass_gp * grad_latest + sq_gp));
  out.clamped = (g_circ < 0.0) + (gp_circ > 0.0);
  out.g_circ = clamp_nonnegative(g_circ / scale, "(g o grad w)") * scale;
  out.gprime_circ = -clamp_nonnegative(-gp_circ / scale_p, "-(g' o grad w)") * scale_p;
  out.conv_lap = Field(grid_, std::move(conv_g));
  return out;
}

}  // namespace kvwave
