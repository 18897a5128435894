#pragma once

// Brute-force references shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <climits>
#include <functional>
#include <map>
#include <random>

#include "magnetolab/linearization.hpp"

namespace oracles {

inline int at(const std::map<int, int>& m, int d, int dflt = 0) {
  const auto it = m.find(d);
  return it == m.end() ? dflt : it->second;
}

// Tries every rank vector r_d (d from lo - 1 to hi - 1) with
// 0 <= r_d <= min(dim C_d, dim C_{d+1}, cap_d) and checks
// r_d + r_{d-1} + target_d = dim C_d in every degree.
inline bool feasible_by_enumeration(const std::map<int, int>& counts, const std::map<int, int>& target,
                                    const std::map<int, int>& caps, bool bottom_open) {
  int lo = INT_MAX, hi = INT_MIN;
  for (const auto& [d, c] : counts)
    if (c > 0) lo = std::min(lo, d), hi = std::max(hi, d);
  for (const auto& [d, t] : target)
    if (t > 0) lo = std::min(lo, d), hi = std::max(hi, d);
  if (lo == INT_MAX) return true;
  std::map<int, int> r;
  r[hi] = 0;
  auto balanced = [&] {
    for (int x = lo; x <= hi; ++x)
      if (r[x] + r[x - 1] + at(target, x) != at(counts, x)) return false;
    return true;
  };
  std::function<bool(int)> search = [&](int d) -> bool {
    if (d < lo) return balanced();
    const int top = std::min({at(counts, d), at(counts, d + 1), at(caps, d, INT_MAX)});
    for (int v = 0; v <= top; ++v) {
      r[d] = v;
      if (search(d - 1)) return true;
    }
    return false;
  };
  // The rank entering the lowest degree is free only with an open bottom.
  const int below_max = bottom_open ? at(counts, lo) : 0;
  for (int b = 0; b <= below_max; ++b) {
    r[lo - 1] = b;
    if (search(hi - 1)) return true;
  }
  return false;
}

// Per-degree counts in degrees 2 down to -4, total at most max_total.
inline std::map<int, int> random_counts(std::mt19937_64& rng, int max_total) {
  std::uniform_int_distribution<int> n(1, max_total), deg(-4, 2);
  std::map<int, int> c;
  const int total = n(rng);
  for (int i = 0; i < total; ++i) ++c[deg(rng)];
  return c;
}

// Mostly acyclic targets, sometimes a little cohomology.
inline std::map<int, int> random_target(std::mt19937_64& rng, const std::map<int, int>& counts) {
  std::map<int, int> t;
  std::uniform_int_distribution<int> coin(0, 3), small(0, 2);
  if (coin(rng) != 0) return t;
  for (const auto& [d, c] : counts) t[d] = std::min(c, small(rng));
  return t;
}

inline std::map<int, int> random_caps(std::mt19937_64& rng, const std::map<int, int>& counts) {
  std::map<int, int> caps;
  std::uniform_int_distribution<int> coin(0, 2), cap(0, 3);
  if (coin(rng) != 0) return caps;
  for (const auto& [d, c] : counts) caps[d] = cap(rng);
  return caps;
}

// Independent Robbin-Salamon count: half the signature of S(0), plus the
// signature of w^T S w on ker(Psi - I) at every interior time where Psi has
// eigenvalue 1, with Psi' = J S Psi.
inline int crossing_index(const magnetolab::SymplecticPath& p) {
  const magnetolab::Mat2 J = (magnetolab::Mat2() << 0, -1, 1, 0).finished();
  auto S = [&](double t) {
    const double h = 1e-6 * p.period();
    const magnetolab::Mat2 d = (p.at(t + h) - p.at(t - h)) / (2 * h);
    const magnetolab::Mat2 s = -J * d * p.at(t).inverse();
    return magnetolab::Mat2(0.5 * (s + s.transpose()));
  };
  auto signature = [](const magnetolab::Mat2& m) {
    Eigen::SelfAdjointEigenSolver<magnetolab::Mat2> es(m);
    int sig = 0;
    for (int i = 0; i < 2; ++i) sig += es.eigenvalues()[i] > 0 ? 1 : -1;
    return sig;
  };
  auto g = [&](double t) { return 2.0 - p.at(t).trace(); };
  auto crossing_sig = [&](double t) {
    Eigen::JacobiSVD<magnetolab::Mat2> svd(p.at(t) - magnetolab::Mat2::Identity(), Eigen::ComputeFullV);
    const magnetolab::Mat2 St = S(t);
    if (svd.singularValues()[0] < 1e-5) return signature(St);
    const magnetolab::Vec2 w = svd.matrixV().col(1);
    return w.dot(St * w) > 0 ? 1 : -1;
  };

  int twice = signature(S(1e-5 * p.period()));  // 2 x the t = 0 contribution
  const int n = 20000;
  const double T = p.period();
  const double dt = T / n;
  for (int i = 1; i < n; ++i) {
    const double t0 = i * dt, t1 = (i + 1) * dt;
    const double a = g(t0), b = g(t1);
    if (i + 1 == n && std::abs(b) < 1e-9) break;  // degenerate end is excluded by the callers
    if ((a > 0) != (b > 0)) {
      double lo = t0, hi = t1;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (lo + hi);
        ((g(m) > 0) == (a > 0) ? lo : hi) = m;
      }
      twice += 2 * crossing_sig(0.5 * (lo + hi));
      continue;
    }
    // Tangential touch (the rotation part passing through the identity).
    const double c = g(std::min(t1 + dt, T));
    if (b < a && b < c && b >= 0 && b < 1e-2) {
      double lo = t0, hi = std::min(t1 + dt, T);
      for (int it = 0; it < 100; ++it) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        (g(m1) < g(m2) ? hi : lo) = (g(m1) < g(m2) ? m2 : m1);
      }
      const double tm = 0.5 * (lo + hi);
      if (g(tm) < 1e-10) twice += 2 * crossing_sig(tm);
    }
  }
  return twice / 2;
}

}  // namespace oracles
