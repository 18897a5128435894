#pragma once

// Dormand-Prince 8(5,3) embedded Runge-Kutta integrator with Hairer's error
// norm and step-size controller, templated on the state dimension.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "magnetolab/errors.hpp"

namespace magnetolab::ode {

struct Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0: automatic
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
  double max_error = 0.0;  // largest accepted normalized error estimate
};

enum class StepAction {
  proceed,   // keep going
  modified,  // state was changed in place (derivative must be recomputed)
  stop,      // terminate the integration now
};

namespace tableau {
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double e51 = 0.1312004499419488073250102996e-01;
inline constexpr double e56 = -0.1225156446376204440720569753e+01;
inline constexpr double e57 = -0.4957589496572501915214079952e+00;
inline constexpr double e58 = 0.1664377182454986536961530415e+01;
inline constexpr double e59 = -0.3503288487499736816886487290e+00;
inline constexpr double e510 = 0.3341791187130174790297318841e+00;
inline constexpr double e511 = 0.8192320648511571246570742613e-01;
inline constexpr double e512 = -0.2235530786388629525884427845e-01;
}  // namespace tableau

template <int N>
using State = Eigen::Matrix<double, N, 1>;

template <int N>
struct StepResult {
  State<N> y;
  State<N> dy;  // derivative at the new point (first stage of the next step)
  double error = 0.0;
};

// One DOP853 step of size h from (t, y) with k1 = f(t, y). The error is the
// normalized estimate (accept when <= 1); it is only meaningful with tolerances.
template <int N, class F>
StepResult<N> dop853_step(F&& f, double t, const State<N>& y, const State<N>& k1, double h,
                          double atol = 1.0, double rtol = 0.0, bool want_error = true) {
  using namespace tableau;
  State<N> k2 = f(t + c2 * h, State<N>(y + h * a21 * k1));
  State<N> k3 = f(t + c3 * h, State<N>(y + h * (a31 * k1 + a32 * k2)));
  State<N> k4 = f(t + c4 * h, State<N>(y + h * (a41 * k1 + a43 * k3)));
  State<N> k5 = f(t + c5 * h, State<N>(y + h * (a51 * k1 + a53 * k3 + a54 * k4)));
  State<N> k6 = f(t + c6 * h, State<N>(y + h * (a61 * k1 + a64 * k4 + a65 * k5)));
  State<N> k7 = f(t + c7 * h, State<N>(y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6)));
  State<N> k8 = f(t + c8 * h, State<N>(y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7)));
  State<N> k9 = f(t + c9 * h,
                  State<N>(y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8)));
  State<N> k10 = f(t + c10 * h, State<N>(y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 +
                                                   a107 * k7 + a108 * k8 + a109 * k9)));
  State<N> k11 = f(t + c11 * h, State<N>(y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 +
                                                   a117 * k7 + a118 * k8 + a119 * k9 + a1110 * k10)));
  State<N> k12 = f(t + h, State<N>(y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 +
                                             a128 * k8 + a129 * k9 + a1210 * k10 + a1211 * k11)));
  const State<N> incr = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;

  StepResult<N> r;
  r.y = y + h * incr;
  r.dy = f(t + h, r.y);
  if (!want_error) return r;

  const State<N> er3 = incr - bhh1 * k1 - bhh2 * k9 - bhh3 * k12;
  const State<N> er5 = e51 * k1 + e56 * k6 + e57 * k7 + e58 * k8 + e59 * k9 + e510 * k10 + e511 * k11 + e512 * k12;
  double err3 = 0.0, err5 = 0.0;
  const Eigen::Index n = y.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(r.y[i]));
    err3 += (er3[i] / sk) * (er3[i] / sk);
    err5 += (er5[i] / sk) * (er5[i] / sk);
  }
  double deno = err5 + 0.01 * err3;
  if (deno <= 0.0) deno = 1.0;
  r.error = std::abs(h) * err5 * std::sqrt(1.0 / (double(n) * deno));
  return r;
}

namespace detail {
template <int N, class F>
double initial_step(F&& f, double t, const State<N>& y, const State<N>& dy, double dir, const Options& o) {
  const Eigen::Index n = y.size();
  double dnf = 0.0, dny = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = o.atol + o.rtol * std::abs(y[i]);
    dnf += (dy[i] / sk) * (dy[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, o.max_step);
  const State<N> y1 = y + dir * h * dy;
  const State<N> f1 = f(t + dir * h, y1);
  double der2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = o.atol + o.rtol * std::abs(y[i]);
    der2 += ((f1[i] - dy[i]) / sk) * ((f1[i] - dy[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
  return std::min({100.0 * std::abs(h), h1, o.max_step});
}
}  // namespace detail

// Adaptive integration of y' = f(t, y) from t0 to t1 (either direction).
// After every accepted step on_step(t_prev, y_prev, t, y) is called; it may
// modify y (return StepAction::modified) or end the run (StepAction::stop).
// Returns the final time reached; y holds the final state.
template <int N, class F, class OnStep>
double integrate(F&& f, double t0, State<N>& y, double t1, const Options& o, Stats& stats, OnStep&& on_step) {
  if (t1 == t0) return t0;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double max_step = std::min(o.max_step, span);
  Options opt = o;
  opt.max_step = max_step;

  auto counted = [&](double t, const State<N>& x) {
    ++stats.evaluations;
    return State<N>(f(t, x));
  };

  double t = t0;
  State<N> dy = counted(t, y);
  double h = o.initial_step > 0.0 ? std::min(o.initial_step, max_step) : detail::initial_step<N>(counted, t, y, dy, dir, opt);
  constexpr double safe = 0.9, facc1 = 1.0 / 0.333, facc2 = 1.0 / 6.0;
  bool last_rejected = false;
  long steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > o.max_steps) throw NumericalError("integrator exceeded the step budget");
    bool last = false;
    if (dir * (t + dir * h - t1) >= 0.0 || std::abs(t1 - (t + dir * h)) < 1e-12 * span) {
      h = std::abs(t1 - t);
      last = true;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw NumericalError("step size underflow (stiff or singular system)");

    const auto r = dop853_step<N>(counted, t, y, dy, dir * h, o.atol, o.rtol);
    if (!r.y.allFinite() || !std::isfinite(r.error)) {
      ++stats.rejected;
      h *= 0.25;
      last_rejected = true;
      continue;
    }
    const double fac11 = std::pow(r.error, 0.125);
    if (r.error <= 1.0) {
      ++stats.accepted;
      stats.max_error = std::max(stats.max_error, r.error);
      const double t_prev = t;
      const State<N> y_prev = y;
      t = last ? t1 : t + dir * h;
      y = r.y;
      dy = r.dy;
      const StepAction act = on_step(t_prev, y_prev, t, y);
      if (act == StepAction::stop) return t;
      if (act == StepAction::modified) dy = counted(t, y);
      double fac = std::max(facc2, std::min(facc1, fac11 / safe));
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      h = std::min(hnew, max_step);
      last_rejected = false;
    } else {
      ++stats.rejected;
      h /= std::min(facc1, fac11 / safe);
      last_rejected = true;
    }
  }
  return t;
}

template <int N, class F>
double integrate(F&& f, double t0, State<N>& y, double t1, const Options& o, Stats& stats) {
  return integrate<N>(std::forward<F>(f), t0, y, t1, o, stats,
                      [](double, const State<N>&, double, State<N>&) { return StepAction::proceed; });
}

// Fixed-step integration with n equal steps (smooth in the initial data).
template <int N, class F, class OnStep>
void integrate_fixed(F&& f, double t0, State<N>& y, double t1, int n, OnStep&& on_step) {
  if (n <= 0 || t1 == t0) return;
  const double h = (t1 - t0) / n;
  State<N> dy = f(t0, y);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    const auto r = dop853_step<N>(f, t, y, dy, h, 1.0, 0.0, false);
    const State<N> y_prev = y;
    y = r.y;
    dy = r.dy;
    const double tn = (i + 1 == n) ? t1 : t + h;
    if (on_step(t, y_prev, tn, y) == StepAction::modified) dy = f(tn, y);
  }
}

template <int N, class F>
void integrate_fixed(F&& f, double t0, State<N>& y, double t1, int n) {
  integrate_fixed<N>(std::forward<F>(f), t0, y, t1, n,
                     [](double, const State<N>&, double, State<N>&) { return StepAction::proceed; });
}

}  // namespace magnetolab::ode
