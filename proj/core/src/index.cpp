#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "magnetolab/linearization.hpp"

namespace magnetolab {

namespace {

constexpr double kPi = std::numbers::pi;

const Mat2& J0() {
  static const Mat2 j = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();
  return j;
}

// Symmetric S with Psi' = J0 S Psi.
Mat2 generator(const SymplecticPath& path, double t) {
  const Mat2 psi = path.at(t);
  const Mat2 S = -J0() * path.derivative(t) * psi.inverse();
  return 0.5 * (S + S.transpose());
}

int signature(const Mat2& S) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(S);
  const auto ev = es.eigenvalues();
  const double cut = 1e-9 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  int sig = 0;
  for (int i = 0; i < 2; ++i) {
    if (ev[i] > cut) ++sig;
    if (ev[i] < -cut) --sig;
  }
  return sig;
}

double gap(const Mat2& m) { return 2.0 - m.trace(); }

void check_endpoint(const SymplecticPath& path) {
  const double tr = path.endpoint().trace();
  if (std::abs(tr - 2.0) <= 1e-8) throw DegeneracyError("endpoint has eigenvalue one", tr);
}

// Argument of the Krein-positive eigenvalue; 0 / pi on the real axis.
double krein_angle(const Mat2& m) {
  const double tr = m.trace();
  if (tr >= 2.0) return 0.0;
  if (tr <= -2.0) return kPi;
  const double phi = std::acos(std::clamp(0.5 * tr, -1.0, 1.0));
  const std::complex<double> lam(std::cos(phi), std::sin(phi));
  std::complex<double> w1, w2;
  if (std::abs(m(0, 1)) >= std::abs(m(1, 0))) {
    w1 = m(0, 1);
    w2 = lam - m(0, 0);
  } else {
    w1 = lam - m(1, 1);
    w2 = m(1, 0);
  }
  // Im(conj(w)^T J0 w) = 2 Im(conj(w2) w1)
  return (std::conj(w2) * w1).imag() > 0.0 ? phi : -phi;
}

}  // namespace

std::string to_string(OrbitType t) { return t == OrbitType::elliptic ? "elliptic" : "hyperbolic"; }

std::pair<int, std::vector<Crossing>> crossings(const SymplecticPath& path) {
  const auto& ts = path.times();
  const auto& vs = path.values();
  const std::size_t n = ts.size();
  const double T = path.period();

  const int initial = signature(-J0() * path.derivative(0.0));
  std::vector<Crossing> out;

  // Passages through the identity: local minima of |Psi - I|.
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = (vs[i] - Mat2::Identity()).norm();
  const double id_tol = 1e-6;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(e[i] <= e[i - 1] && e[i] <= e[i + 1])) continue;
    double a = ts[i - 1], b = ts[i + 1];
    auto err = [&](double t) { return (path.at(t) - Mat2::Identity()).norm(); };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = err(c), fd = err(d);
    for (int it = 0; it < 90 && b - a > 1e-15 * T; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = err(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = err(d);
      }
    }
    const double tm = 0.5 * (a + b);
    if (err(tm) >= id_tol) continue;
    if (!out.empty() && out.back().kernel_dim == 2 && std::abs(out.back().t - tm) < 1e-9 * T) continue;
    out.push_back({tm, signature(generator(path, tm)), 2});
  }

  // Parabolic passages: sign changes of 2 - tr.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d0 = gap(vs[i]), d1 = gap(vs[i + 1]);
    if (!(d0 * d1 < 0.0)) continue;
    double a = ts[i], b = ts[i + 1], fa = d0;
    for (int it = 0; it < 80 && b - a > 1e-13 * T; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = gap(path.at(m));
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    const double tc = 0.5 * (a + b);
    bool near_identity = false;
    for (const auto& c : out)
      if (c.kernel_dim == 2 && std::abs(c.t - tc) < 1e-6 * T) near_identity = true;
    if (near_identity) continue;
    const Mat2 psi = path.at(tc);
    Eigen::JacobiSVD<Mat2> svd(psi - Mat2::Identity(), Eigen::ComputeFullV);
    const Eigen::Vector2d w = svd.matrixV().col(1);
    const double form = w.dot(generator(path, tc) * w);
    out.push_back({tc, form > 0.0 ? 1 : (form < 0.0 ? -1 : 0), 1});
  }
  std::sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) { return x.t < y.t; });
  return {initial, out};
}

int cz_index(const SymplecticPath& path) {
  check_endpoint(path);
  const auto [initial, list] = crossings(path);
  int twice = initial;
  for (const auto& c : list) twice += 2 * c.signature;
  // The initial form of a symplectic path has even signature at a regular start.
  if (twice % 2 != 0) throw DegeneracyError("initial crossing form is degenerate", path.endpoint().trace());
  return twice / 2;
}

double rotation_number(const SymplecticPath& path) {
  double acc = 0.0, prev = 0.0;
  bool first = true;
  for (const auto& m : path.values()) {
    const double a = krein_angle(m);
    if (first) {
      acc = a;
      first = false;
    } else {
      acc += std::remainder(a - prev, 2.0 * kPi);
    }
    prev = a;
  }
  return acc / (2.0 * kPi);
}

OrbitIndexData analyze_path(const SymplecticPath& path, int k_max) {
  OrbitIndexData d;
  d.trace = path.endpoint().trace();
  if (std::abs(d.trace - 2.0) <= 1e-8 || std::abs(d.trace + 2.0) <= 1e-8)
    throw DegeneracyError("transversally degenerate orbit", d.trace);
  d.type = std::abs(d.trace) < 2.0 ? OrbitType::elliptic : OrbitType::hyperbolic;
  d.negative = d.trace < -2.0;
  d.mu_bar = cz_index(path);
  d.delta_tilde = rotation_number(path);
  if (d.type == OrbitType::elliptic) {
    for (int k = 1; k <= k_max; ++k) {
      const double x = k * d.delta_tilde;
      if (std::abs(x - std::round(x)) < 1e-6) throw DegeneracyError("resonant rotation number", d.trace);
    }
  }
  return d;
}

int iterate_index(const OrbitIndexData& data, int k) {
  if (k < 1) throw ConfigError("iterate order must be at least 1");
  if (data.type == OrbitType::elliptic) return 2 * int(std::floor(k * data.delta_tilde)) + 1;
  return k * data.mu_bar;
}

std::pair<int, int> grading(int mu_bar, int n) { return {n - mu_bar - 1, n - mu_bar}; }

bool good_bad(int prime_mu_bar, OrbitType type, int k) {
  if (k < 1) throw ConfigError("iterate order must be at least 1");
  if (type == OrbitType::elliptic) return true;
  return !(prime_mu_bar % 2 != 0 && k % 2 == 0);
}

IterationReport iteration_consistency(const SymplecticPath& path, const OrbitIndexData& data, int k_max) {
  IterationReport rep;
  for (int k = 1; k <= k_max; ++k) {
    IterationRow row;
    row.k = k;
    row.formula = iterate_index(data, k);
    try {
      row.computed = cz_index(path.iterate(k));
      row.match = *row.computed == row.formula;
      if (!row.match) ++rep.mismatches;
    } catch (const DegeneracyError& e) {
      row.note = std::string("degenerate iterate skipped: ") + e.what();
    }
    rep.rows.push_back(row);
  }
  return rep;
}

IterationReport iteration_consistency(const MagneticSystem& sys, const ClosedOrbit& orbit, int k_max) {
  const auto lin = linearized_flow(sys, orbit);
  const auto data = analyze_path(lin.path, k_max);
  return iteration_consistency(lin.path, data, k_max);
}

}  // namespace magnetolab
