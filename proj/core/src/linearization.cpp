#include "magnetolab/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "magnetolab/contact.hpp"

namespace magnetolab {

SymplecticPath::SymplecticPath(double period, std::vector<double> times, std::vector<Mat2> values, Evaluator exact)
    : period_(period), times_(std::move(times)), values_(std::move(values)), exact_(std::move(exact)) {
  if (!(period_ > 0.0)) throw ConfigError("symplectic path needs a positive period");
  if (times_.size() != values_.size() || times_.size() < 2)
    throw ConfigError("symplectic path needs at least two matching samples");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw ConfigError("symplectic path times must increase");
  values_.front() = Mat2::Identity();
}

SymplecticPath SymplecticPath::from_function(Evaluator f, double period, int n) {
  if (n < 1) throw ConfigError("sample count must be positive");
  std::vector<double> t(n + 1);
  std::vector<Mat2> v(n + 1);
  for (int i = 0; i <= n; ++i) {
    t[i] = period * i / n;
    v[i] = f(t[i]);
  }
  return SymplecticPath(period, std::move(t), std::move(v), std::move(f));
}

Mat2 SymplecticPath::at(double t) const {
  if (exact_) return exact_(t);
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = std::size_t(it - times_.begin());
  const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
  return (1.0 - w) * values_[i - 1] + w * values_[i];
}

Mat2 SymplecticPath::derivative(double t) const {
  const double h = 1e-5 * period_;
  if (t < h) return (-3.0 * at(t) + 4.0 * at(t + h) - at(t + 2 * h)) / (2 * h);
  if (t > period_ - h) return (3.0 * at(t) - 4.0 * at(t - h) + at(t - 2 * h)) / (2 * h);
  return (at(t + h) - at(t - h)) / (2 * h);
}

double SymplecticPath::max_det_residual() const {
  double r = 0.0;
  for (const auto& m : values_) r = std::max(r, std::abs(m.determinant() - 1.0));
  return r;
}

SymplecticPath SymplecticPath::iterate(int k) const {
  if (k < 1) throw ConfigError("iterate order must be at least 1");
  const Mat2 P = endpoint();
  std::vector<double> t;
  std::vector<Mat2> v;
  Mat2 Pj = Mat2::Identity();
  for (int j = 0; j < k; ++j) {
    for (std::size_t i = (j == 0 ? 0 : 1); i < times_.size(); ++i) {
      t.push_back(times_[i] + j * period_);
      v.push_back(values_[i] * Pj);
    }
    Pj = Pj * P;
  }
  const SymplecticPath base = *this;
  const double T = period_;
  Evaluator ev = [base, P, T, k](double s) {
    int j = int(std::floor(s / T));
    j = std::clamp(j, 0, k - 1);
    Mat2 Pj = Mat2::Identity();
    for (int i = 0; i < j; ++i) Pj = Pj * P;
    return Mat2(base.at(s - j * T) * Pj);
  };
  return SymplecticPath(k * period_, std::move(t), std::move(v), std::move(ev));
}

SymplecticPath SymplecticPath::reparametrized(const std::function<double(double)>& phi, double new_period,
                                              int n) const {
  const SymplecticPath base = *this;
  return from_function([base, phi](double s) { return base.at(phi(s)); }, new_period, n);
}

namespace {

using State20 = ode::State<20>;

State20 pack(const Vec4& x, const Mat4& M) {
  State20 y;
  y.head<4>() = x;
  for (int j = 0; j < 4; ++j) y.segment<4>(4 + 4 * j) = M.col(j);
  return y;
}

void unpack(const State20& y, Vec4& x, Mat4& M) {
  x = y.head<4>();
  for (int j = 0; j < 4; ++j) M.col(j) = y.segment<4>(4 + 4 * j);
}

State20 variational_rhs(const MagneticSystem& sys, int chart, const State20& y) {
  Vec4 x;
  Mat4 M;
  unpack(y, x, M);
  return pack(ode_rhs(sys, chart, x), ode_jacobian(sys, chart, x) * M);
}

// Switch the sphere chart, carrying the tangent map along.
bool settle(const MagneticSystem& sys, int& chart, State20& y) {
  const Vec2 q = y.head<2>();
  sys.surface.check_domain(chart, q);
  if (!sys.surface.wants_switch(chart, q)) return false;
  Vec4 x;
  Mat4 M;
  unpack(y, x, M);
  const Mat4 J = sys.surface.transition_jacobian(chart, x.head<2>(), x.tail<2>());
  Vec2 q2, v2;
  sys.surface.transition(chart, x.head<2>(), x.tail<2>(), q2, v2);
  chart = 1 - chart;
  x << q2, v2;
  y = pack(x, J * M);
  return true;
}

// Coordinates of M e_j in the normalized quotient frame (V, H)/rho at x(t).
Mat2 transverse_matrix(const MagneticSystem& sys, int chart, const Vec4& x, const Mat4& M, const Vec4& e1,
                       const Vec4& e2, double t) {
  const Mat4 Om = symplectic_matrix(sys, chart, x);
  const double rho = sys.surface.norm(chart, x.head<2>(), x.tail<2>());
  const Vec4 f1 = frame_field(sys.surface, chart, x, FrameField::V) / rho;
  const Vec4 f2 = frame_field(sys.surface, chart, x, FrameField::H) / rho;
  const double norm = f1.dot(Om * f2);
  if (!(std::abs(norm) > 1e-12)) throw FrameError("transverse frame lost rank", t);
  Mat2 P;
  for (int j = 0; j < 2; ++j) {
    const Vec4 w = M * (j == 0 ? e1 : e2);
    P(0, j) = w.dot(Om * f2) / norm;
    P(1, j) = f1.dot(Om * w) / norm;
  }
  return P;
}

}  // namespace

LinearizedOrbit linearized_flow(const MagneticSystem& sys, const ClosedOrbit& orbit, const LinearizationOptions& opt) {
  const double T = orbit.period;
  if (!(T > 0.0)) throw ConfigError("orbit period must be positive");
  if (opt.min_samples < 8) throw ConfigError("linearization needs at least 8 samples");
  const PhasePoint& p0 = orbit.x0;
  if (!(p0.rho > 0.0)) throw SingularityError("linearization needs rho > 0");

  const Vec4 x0 = p0.state();
  const Vec4 e1 = frame_field(sys.surface, p0.chart, x0, FrameField::V) / p0.rho;
  const Vec4 e2 = frame_field(sys.surface, p0.chart, x0, FrameField::H) / p0.rho;

  struct Node {
    double t;
    int chart;
    State20 y;
  };
  std::vector<Node> nodes;
  int chart = p0.chart;
  State20 y = pack(x0, Mat4::Identity());
  nodes.push_back({0.0, chart, y});
  ode::Options o;
  o.rtol = o.atol = opt.tol;
  o.max_step = T / opt.min_samples;
  ode::Stats stats;
  auto rhs = [&](double, const State20& z) { return variational_rhs(sys, chart, z); };
  ode::integrate<20>(rhs, 0.0, y, T, o, stats, [&](double, const State20&, double t, State20& z) {
    const bool switched = settle(sys, chart, z);
    nodes.push_back({t, chart, z});
    return switched ? ode::StepAction::modified : ode::StepAction::proceed;
  });

  std::vector<double> times;
  std::vector<Mat2> values;
  times.reserve(nodes.size());
  values.reserve(nodes.size());
  for (const auto& nd : nodes) {
    Vec4 x;
    Mat4 M;
    unpack(nd.y, x, M);
    times.push_back(nd.t);
    values.push_back(transverse_matrix(sys, nd.chart, x, M, e1, e2, nd.t));
  }

  // Exact evaluation: two fixed DOP853 steps from the nearest earlier node.
  auto shared_nodes = std::make_shared<std::vector<Node>>(std::move(nodes));
  const MagneticSystem sys_copy = sys;
  SymplecticPath::Evaluator exact = [shared_nodes, sys_copy, e1, e2](double t) {
    const auto& nd = *shared_nodes;
    auto it = std::upper_bound(nd.begin(), nd.end(), t, [](double a, const Node& b) { return a < b.t; });
    std::size_t i = it == nd.begin() ? 0 : std::size_t(it - nd.begin()) - 1;
    int ch = nd[i].chart;
    State20 z = nd[i].y;
    if (t != nd[i].t) {
      auto f = [&](double, const State20& w) { return variational_rhs(sys_copy, ch, w); };
      ode::integrate_fixed<20>(f, nd[i].t, z, t, 2, [&](double, const State20&, double, State20& w) {
        return settle(sys_copy, ch, w) ? ode::StepAction::modified : ode::StepAction::proceed;
      });
    }
    Vec4 x;
    Mat4 M;
    unpack(z, x, M);
    return transverse_matrix(sys_copy, ch, x, M, e1, e2, t);
  };

  LinearizedOrbit out{SymplecticPath(T, std::move(times), std::move(values), std::move(exact)), 0.0, ""};

  // Tilt of the vertical against the contact plane: tan(angle) compares
  // alpha(V) with alpha of the flow direction, rescaled to the quotient.
  double worst = 0.0;
  bool have_form = true;
  std::string why = "no contact form: system has no primitive";
  for (const auto& nd : *shared_nodes) {
    Vec4 x;
    Mat4 M;
    unpack(nd.y, x, M);
    const PhasePoint p = make_phase_point(sys.surface, nd.chart, x);
    const auto alpha = contact_form(sys, sys.s, sys.a, p);
    if (!alpha) {
      have_form = false;
      break;
    }
    const Vec4 xe = ode_rhs(sys, p);
    const double ax = alpha->dot(xe);
    const double av = alpha->dot(frame_field(sys.surface, nd.chart, x, FrameField::V));
    if (!(std::abs(ax) > 1e-14)) {
      have_form = false;
      why = "contact form vanishes on the flow direction";
      break;
    }
    const double sf = sys.s * sys.density(nd.chart, x.head<2>());
    const double ang = std::atan(av / ax * std::sqrt(1.0 + sf * sf));
    worst = std::max(worst, std::abs(ang));
  }
  if (have_form) {
    out.frame_winding = worst / (2.0 * std::numbers::pi);
    out.frame_note = out.frame_winding < 0.25 ? "frame tilt below a quarter turn" : "frame tilt exceeds a quarter turn";
  } else {
    out.frame_winding = std::numeric_limits<double>::quiet_NaN();
    out.frame_note = why;
  }
  return out;
}

}  // namespace magnetolab
