#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "magnetolab/flow.hpp"

namespace magnetolab {

// A sampled path of 2x2 symplectic matrices on [0, T] with Psi(0) = I. An
// optional exact evaluator is used for refinement between samples.
class SymplecticPath {
 public:
  using Evaluator = std::function<Mat2(double)>;

  SymplecticPath() = default;
  SymplecticPath(double period, std::vector<double> times, std::vector<Mat2> values, Evaluator exact = {});

  // Path given by a function, sampled at n + 1 equispaced times.
  static SymplecticPath from_function(Evaluator f, double period, int n);

  double period() const { return period_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Mat2>& values() const { return values_; }
  Mat2 endpoint() const { return values_.back(); }

  Mat2 at(double t) const;
  Mat2 derivative(double t) const;
  double max_det_residual() const;

  // k-fold concatenation: Psi(t + jT) = Psi(t) Psi(T)^j on [0, kT].
  SymplecticPath iterate(int k) const;
  // Same path in a new time variable: t = phi(s), phi increasing with
  // phi(0) = 0 and phi(new_period) = period; sampled at n + 1 points.
  SymplecticPath reparametrized(const std::function<double(double)>& phi, double new_period, int n) const;

 private:
  double period_ = 0.0;
  std::vector<double> times_;
  std::vector<Mat2> values_;
  Evaluator exact_;
};

struct LinearizationOptions {
  double tol = 1e-12;
  int min_samples = 400;  // caps the step at T / min_samples
};

struct LinearizedOrbit {
  SymplecticPath path;
  double frame_winding = 0.0;  // turns of the projected vertical; NaN without contact form
  std::string frame_note;
};

// Transverse linearized flow along an orbit, in the frame (P V, P H) of the
// contact distribution, normalized so the frame is symplectic.
LinearizedOrbit linearized_flow(const MagneticSystem& sys, const ClosedOrbit& orbit,
                                const LinearizationOptions& opt = {});

enum class OrbitType { elliptic, hyperbolic };
std::string to_string(OrbitType t);

struct OrbitIndexData {
  int mu_bar = 0;
  OrbitType type = OrbitType::hyperbolic;
  bool negative = false;  // negative hyperbolic (trace < -2)
  double delta_tilde = 0.0;  // rotation number; meaningful for elliptic orbits
  double trace = 0.0;
};

// Robbin-Salamon index from crossing forms (endpoint must not have eigenvalue 1).
int cz_index(const SymplecticPath& path);

struct Crossing {
  double t = 0.0;
  int signature = 0;
  int kernel_dim = 0;
};
// All interior eigenvalue-one crossings with their crossing-form signatures,
// plus the signature of the initial crossing form.
std::pair<int, std::vector<Crossing>> crossings(const SymplecticPath& path);

// Unwrapped Krein-signed eigenvalue angle divided by 2 pi at the endpoint.
double rotation_number(const SymplecticPath& path);

// Type, index and rotation number; rejects |trace| = 2 and resonant rotation
// numbers (|k Delta - round(k Delta)| < 1e-6 for some k <= k_max).
OrbitIndexData analyze_path(const SymplecticPath& path, int k_max = 8);

int iterate_index(const OrbitIndexData& data, int k);
std::pair<int, int> grading(int mu_bar, int n = 2);
// True when good.
bool good_bad(int prime_mu_bar, OrbitType type, int k);

struct IterationRow {
  int k = 0;
  int formula = 0;
  std::optional<int> computed;
  bool match = false;
  std::string note;
};

struct IterationReport {
  std::vector<IterationRow> rows;
  int mismatches = 0;
};

IterationReport iteration_consistency(const SymplecticPath& path, const OrbitIndexData& data, int k_max);
IterationReport iteration_consistency(const MagneticSystem& sys, const ClosedOrbit& orbit, int k_max);

}  // namespace magnetolab
