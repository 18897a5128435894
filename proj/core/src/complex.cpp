#include "magnetolab/complex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace magnetolab {

Rational::Rational(long long n, long long d) {
  if (d == 0) throw ConfigError("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n < 0 ? -n : n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

std::string Rational::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }

std::map<int, int> GeneratorTable::counts() const {
  std::map<int, int> c;
  for (const auto& g : entries) ++c[g.degree];
  return c;
}

std::vector<int> GeneratorTable::degree_sequence() const {
  std::vector<int> d;
  for (const auto& g : entries) d.push_back(g.degree);
  std::sort(d.rbegin(), d.rend());
  return d;
}

int GeneratorTable::find(const std::string& id) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].id == id) return int(i);
  return -1;
}

GeneratorTable build_table(const std::vector<OrbitInput>& orbits, double cutoff, const MorseSpec& morse, int n) {
  GeneratorTable t;
  for (std::size_t i = 0; i < morse.indices.size(); ++i) {
    Generator g;
    g.id = "m" + std::to_string(morse.indices[i]);
    if (std::count(morse.indices.begin(), morse.indices.end(), morse.indices[i]) > 1)
      g.id += "_" + std::to_string(i);
    g.degree = morse.indices[i];
    g.kind = GeneratorKind::morse;
    g.morse_index = morse.indices[i];
    g.homotopy = "0";
    t.entries.push_back(g);
  }
  for (const auto& o : orbits) {
    if (!(o.period > 0.0)) throw ConfigError("orbit " + o.id + " needs a positive period");
    for (int k = 1; k * o.period <= cutoff * (1.0 + 1e-12); ++k) {
      if (o.data.type == OrbitType::elliptic) {
        const double x = k * o.data.delta_tilde;
        if (std::abs(x - std::round(x)) < 1e-6)
          throw ConfigError("orbit " + o.id + " iterate " + std::to_string(k) + " is resonant");
      }
      const int mu = iterate_index(o.data, k);
      const auto [dm, dp] = grading(mu, n);
      const bool good = good_bad(o.data.mu_bar, o.data.type, k);
      for (int sign = 0; sign < 2; ++sign) {
        Generator g;
        g.id = o.id + "^" + std::to_string(k) + (sign ? "+" : "-");
        g.degree = sign ? dp : dm;
        g.period = k * o.period;
        g.kind = sign ? GeneratorKind::orbit_plus : GeneratorKind::orbit_minus;
        g.orbit = o.id;
        g.iterate = k;
        g.mu_bar = mu;
        g.good = good;
        g.homotopy = o.homotopy;
        t.entries.push_back(g);
      }
    }
  }
  return t;
}

namespace {

bool same_orbit(const Generator& a, const Generator& b) {
  return a.kind != GeneratorKind::morse && b.kind != GeneratorKind::morse && a.orbit == b.orbit &&
         a.iterate == b.iterate;
}

bool strictly_higher(const Generator& to, const Generator& from) { return to.period > from.period * (1.0 + 1e-12) + 1e-300; }

Entry make_entry(EntryState s, long long v = 0, bool amb = false) {
  Entry e;
  e.state = s;
  e.value = Rational(v);
  e.sign_ambiguous = amb;
  return e;
}

}  // namespace

StructuredDifferential build_skeleton(const GeneratorTable& table) {
  const auto& g = table.entries;
  const std::size_t n = g.size();
  StructuredDifferential sk;
  sk.d.assign(n, std::vector<Entry>(n));
  sk.delta.assign(n, std::vector<Entry>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Generator& src = g[i];
      const Generator& dst = g[j];
      if (src.homotopy != dst.homotopy) continue;  // different components never interact
      if (dst.degree == src.degree + 1) {
        Entry e = make_entry(EntryState::unknown);
        if (strictly_higher(dst, src)) e = make_entry(EntryState::forced_zero);
        if (same_orbit(src, dst) && src.kind == GeneratorKind::orbit_minus && dst.kind == GeneratorKind::orbit_plus)
          e = src.good ? make_entry(EntryState::fixed, 0) : make_entry(EntryState::fixed, 2, true);
        sk.d[j][i] = e;
      }
      if (dst.degree == src.degree - 1) {
        Entry e = make_entry(EntryState::unknown);
        if (strictly_higher(dst, src)) e = make_entry(EntryState::forced_zero);
        if (same_orbit(src, dst) && src.kind == GeneratorKind::orbit_plus && dst.kind == GeneratorKind::orbit_minus)
          e = src.good ? make_entry(EntryState::fixed, src.iterate) : make_entry(EntryState::fixed, 0);
        sk.delta[j][i] = e;
      }
    }
  return sk;
}

int structural_rank(const GeneratorTable& table, const std::vector<std::vector<Entry>>& m, int from, int to) {
  std::vector<int> cols, rows;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    if (table.entries[i].degree == from) cols.push_back(int(i));
    if (table.entries[i].degree == to) rows.push_back(int(i));
  }
  std::vector<int> match(rows.size(), -1);
  std::function<bool(std::size_t, std::vector<char>&)> augment = [&](std::size_t c, std::vector<char>& seen) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (m[rows[r]][cols[c]].zero() || seen[r]) continue;
      seen[r] = 1;
      if (match[r] < 0 || augment(std::size_t(match[r]), seen)) {
        match[r] = int(c);
        return true;
      }
    }
    return false;
  };
  int rank = 0;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<char> seen(rows.size(), 0);
    if (augment(c, seen)) ++rank;
  }
  return rank;
}

InjectivityResult delta_injective_top(const GeneratorTable& table) {
  InjectivityResult res;
  const auto sk = build_skeleton(table);
  std::vector<int> top;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& g = table.entries[i];
    if (g.degree != 2 || g.kind == GeneratorKind::morse) continue;
    if (g.kind != GeneratorKind::orbit_plus) {
      res.offending = g.id;
      res.reason = "degree-2 generator " + g.id + " is not an x_+";
      return res;
    }
    top.push_back(int(i));
  }
  std::sort(top.begin(), top.end(), [&](int a, int b) { return table.entries[a].period > table.entries[b].period; });
  for (std::size_t a = 0; a < top.size(); ++a) {
    const auto& g = table.entries[top[a]];
    const int pivot = table.find(g.orbit + "^" + std::to_string(g.iterate) + "-");
    if (!g.good || pivot < 0 || sk.delta[pivot][top[a]].zero()) {
      res.offending = g.id;
      res.reason = g.good ? "missing partner x_- for " + g.id : "bad orbit " + g.id + " has <Delta x_+, x_-> = 0";
      return res;
    }
    // Every other generator must vanish on this pivot row: lower periods by
    // filtration; equal periods are not decidable.
    for (std::size_t b = 0; b < top.size(); ++b) {
      if (b == a) continue;
      if (!sk.delta[pivot][top[b]].zero() && b > a) {
        res.offending = table.entries[top[b]].id;
        res.reason = "period tie between " + g.id + " and " + table.entries[top[b]].id;
        return res;
      }
    }
    res.pivots.push_back(g.id);
  }
  res.injective = true;
  res.reason = top.empty() ? "no orbit generators in degree 2" : "triangular with nonzero diagonal";
  return res;
}

FeasibilityResult acyclicity_feasible(const std::map<int, int>& counts, const std::map<int, int>& target,
                                      const std::map<int, int>& caps, bool bottom_open) {
  FeasibilityResult res;
  int hi = INT32_MIN, lo = INT32_MAX;
  for (const auto& [d, c] : counts)
    if (c > 0) hi = std::max(hi, d), lo = std::min(lo, d);
  for (const auto& [d, t] : target)
    if (t > 0) hi = std::max(hi, d), lo = std::min(lo, d);
  if (hi == INT32_MIN) {
    res.feasible = true;
    res.reason = "empty complex";
    return res;
  }
  auto get = [](const std::map<int, int>& m, int d, int dflt) {
    const auto it = m.find(d);
    return it == m.end() ? dflt : it->second;
  };
  int r = 0;  // rank of d leaving degree hi
  res.ranks[hi] = 0;
  for (int d = hi; d >= lo; --d) {
    const int c = get(counts, d, 0), t = get(target, d, 0);
    const int below = c - t - r;
    std::ostringstream os;
    if (d == lo) {
      if (below < 0 || (!bottom_open && below != 0)) {
        os << "degree " << d << ": " << c << " generators cannot carry rank " << r << " plus cohomology " << t;
        res.reason = os.str();
        res.window_high = d;
        res.window_low = d - 1;
        return res;
      }
      if (below > 0) res.ranks[d - 1] = below;
      break;
    }
    const int cb = get(counts, d - 1, 0);
    const int cap = std::min({cb, c, get(caps, d - 1, INT32_MAX)});
    if (below < 0 || below > cap) {
      os << "degrees " << d << "/" << d - 1 << ": need rank " << below << " from degree " << d - 1
         << " (allowed 0.." << std::max(cap, 0) << ")";
      res.reason = os.str();
      res.window_high = d;
      res.window_low = d - 1;
      return res;
    }
    res.ranks[d - 1] = below;
    r = below;
  }
  res.feasible = true;
  res.reason = "rank assignment found";
  return res;
}

FeasibilityResult acyclicity_feasible(const GeneratorTable& table, const std::map<int, int>& target, bool bottom_open) {
  const auto sk = build_skeleton(table);
  std::map<int, int> caps;
  for (const auto& [d, c] : table.counts()) {
    (void)c;
    caps[d] = structural_rank(table, sk.d, d, d + 1);
  }
  return acyclicity_feasible(table.counts(), target, caps, bottom_open);
}

namespace {

int matrix_rank(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-9);
  return int(lu.rank());
}

Eigen::MatrixXd block(const GeneratorTable& t, const Eigen::MatrixXd& m, int from, int to) {
  std::vector<int> cols, rows;
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    if (t.entries[i].degree == from) cols.push_back(int(i));
    if (t.entries[i].degree == to) rows.push_back(int(i));
  }
  Eigen::MatrixXd b(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) b(r, c) = m(rows[r], cols[c]);
  return b;
}

struct Slot {
  bool in_delta;
  int row, col;
  bool sign_only;
  double magnitude;
};

// Walks every assignment of the free slots; fn returns false to stop.
void for_each_completion(const GeneratorTable& table, const StructuredDifferential& sk, const std::vector<int>& values,
                         const std::function<bool(const Eigen::MatrixXd&, const Eigen::MatrixXd&)>& fn) {
  const int n = int(table.entries.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n), dl = Eigen::MatrixXd::Zero(n, n);
  std::vector<Slot> slots;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      for (int which = 0; which < 2; ++which) {
        const Entry& e = which ? sk.delta[j][i] : sk.d[j][i];
        auto& m = which ? dl : d;
        if (e.state == EntryState::fixed) {
          m(j, i) = e.value.value();
          if (e.sign_ambiguous && e.value.num != 0) slots.push_back({bool(which), j, i, true, e.value.value()});
        } else if (e.state == EntryState::unknown) {
          slots.push_back({bool(which), j, i, false, 0.0});
        }
      }
    }
  std::vector<std::size_t> choice(slots.size(), 0);
  while (true) {
    for (std::size_t s = 0; s < slots.size(); ++s) {
      auto& m = slots[s].in_delta ? dl : d;
      m(slots[s].row, slots[s].col) =
          slots[s].sign_only ? (choice[s] ? -slots[s].magnitude : slots[s].magnitude) : double(values[choice[s]]);
    }
    if (!fn(d, dl)) return;
    std::size_t s = 0;
    for (; s < slots.size(); ++s) {
      const std::size_t radix = slots[s].sign_only ? 2 : values.size();
      if (++choice[s] < radix) break;
      choice[s] = 0;
    }
    if (s == slots.size()) return;
  }
}

bool chain_compatible(const Eigen::MatrixXd& d, const Eigen::MatrixXd& dl) {
  return (d * d).cwiseAbs().maxCoeff() < 1e-12 && (d * dl + dl * d).cwiseAbs().maxCoeff() < 1e-12;
}

std::size_t free_slots(const StructuredDifferential& sk) {
  std::size_t u = 0;
  for (const auto* m : {&sk.d, &sk.delta})
    for (const auto& row : *m)
      for (const auto& e : row)
        if (e.state == EntryState::unknown || (e.sign_ambiguous && e.value.num != 0)) ++u;
  return u;
}

}  // namespace

std::map<int, int> cohomology(const GeneratorTable& table, const Eigen::MatrixXd& d) {
  std::map<int, int> h;
  for (const auto& [deg, c] : table.counts())
    h[deg] = c - matrix_rank(block(table, d, deg, deg + 1)) - matrix_rank(block(table, d, deg - 1, deg));
  return h;
}

std::vector<Completion> enumerate_completions(const GeneratorTable& table, const StructuredDifferential& sk,
                                              const std::vector<int>& values, std::size_t limit) {
  std::vector<Completion> out;
  if (values.empty()) throw ConfigError("completion values must not be empty");
  for_each_completion(table, sk, values, [&](const Eigen::MatrixXd& d, const Eigen::MatrixXd& dl) {
    if (chain_compatible(d, dl)) out.push_back({d, dl});
    return out.size() < limit;
  });
  return out;
}

BvReport bv_obstruction(const GeneratorTable& table, const BvScenario& sc) {
  if (sc.sources.empty()) throw ConfigError("scenario needs at least one source generator");
  std::vector<int> S;
  for (const auto& id : sc.sources) {
    const int k = table.find(id);
    if (k < 0) throw ConfigError("unknown generator " + id);
    if (table.entries[k].kind != GeneratorKind::orbit_plus) throw ConfigError(id + " is not an x_+ generator");
    S.push_back(k);
  }
  const int deg = table.entries[S[0]].degree;
  for (int k : S)
    if (table.entries[k].degree != deg) throw ConfigError("scenario sources must share one degree");

  const auto sk = build_skeleton(table);
  const auto& g = table.entries;
  const int n = int(g.size());
  BvReport rep;
  auto target_at = [&](int d) {
    const auto it = sc.target.find(d);
    return it == sc.target.end() ? 0 : it->second;
  };

  // 1. A nonzero cycle in span(S) by rank-nullity.
  std::vector<int> rows;
  for (int j = 0; j < n; ++j)
    if (g[j].degree == deg + 1)
      for (int s : S)
        if (!sk.d[j][s].zero()) {
          rows.push_back(j);
          break;
        }
  if (S.size() <= rows.size()) {
    rep.reason = "d restricted to the sources can be injective: no forced cycle";
  } else {
    std::ostringstream os;
    os << "d on span of " << S.size() << " sources reaches only " << rows.size()
       << " generators: a nonzero cycle y exists";
    rep.steps.push_back(os.str());

    // 2. y = d z with z in degree deg-1.
    if (target_at(deg) != 0) {
      rep.reason = "target cohomology in degree " + std::to_string(deg) + " is nonzero: y need not be exact";
    } else {
      std::vector<int> R;
      for (int s : S) {
        bool reachable = false;
        for (int z = 0; z < n; ++z)
          if (g[z].degree == deg - 1 && !sk.d[s][z].zero()) reachable = true;
        if (reachable)
          R.push_back(s);
        else
          rep.steps.push_back("coefficient of " + g[s].id + " vanishes: no generator of degree " +
                              std::to_string(deg - 1) + " can reach it");
      }
      if (R.empty()) {
        rep.contradiction = true;
        rep.reason = "every coefficient of the nonzero cycle y is forced to vanish";
      } else {
        // 3. Delta z = 0 by filtration, hence Delta y = -d Delta z = 0.
        bool delta_z_zero = true;
        for (int z = 0; z < n && delta_z_zero; ++z)
          if (g[z].degree == deg - 1)
            for (int w = 0; w < n; ++w)
              if (g[w].degree == deg - 2 && !sk.delta[w][z].zero()) delta_z_zero = false;
        if (!delta_z_zero) {
          rep.reason = "Delta on degree " + std::to_string(deg - 1) + " is not forced to vanish";
        } else {
          rep.steps.push_back("Delta z = 0 by the period filtration, so Delta y = -d Delta z = 0");
          // 4. Delta is provably injective on span(R).
          std::sort(R.begin(), R.end(), [&](int a, int b) { return g[a].period > g[b].period; });
          bool ok = true;
          for (std::size_t a = 0; a < R.size() && ok; ++a) {
            const int piv = table.find(g[R[a]].orbit + "^" + std::to_string(g[R[a]].iterate) + "-");
            if (piv < 0) {
              ok = false;
              rep.reason = "no partner x_- for " + g[R[a]].id + ": no obstruction";
              break;
            }
            if (sk.delta[piv][R[a]].zero()) {
              ok = false;
              rep.reason = "<Delta " + g[R[a]].id + ", " + g[piv].id + "> is zero (b = 0 for a bad orbit): no obstruction";
              break;
            }
            for (std::size_t b = a + 1; b < R.size(); ++b)
              if (!sk.delta[piv][R[b]].zero()) {
                ok = false;
                rep.reason = "period tie between " + g[R[a]].id + " and " + g[R[b]].id;
              }
            if (ok)
              rep.steps.push_back("<Delta y, " + g[piv].id + "> = " + sk.delta[piv][R[a]].value.str() +
                                  " * lambda(" + g[R[a]].id + ")");
          }
          if (ok) {
            rep.contradiction = true;
            rep.reason = "Delta y must vanish but Delta is injective on the surviving terms of y";
          }
        }
      }
    }
  }

  if (free_slots(sk) <= std::size_t(std::max(sc.enumerate_limit, 0))) {
    rep.enumerated = true;
    // The table is a truncation: its lowest degree may still be hit from below.
    const int bottom = table.counts().begin()->first;
    auto matches = [&](const std::map<int, int>& h) {
      for (const auto& [d, c] : h)
        if (d == bottom ? c < target_at(d) : c != target_at(d)) return false;
      return true;
    };
    for_each_completion(table, sk, {-1, 0, 1}, [&](const Eigen::MatrixXd& d, const Eigen::MatrixXd& dl) {
      ++rep.completions_checked;
      if (chain_compatible(d, dl) && matches(cohomology(table, d))) ++rep.consistent_completions;
      return true;
    });
  }
  return rep;
}

std::vector<std::pair<int, int>> mb_e1_counts(const std::vector<int>& a, bool equivariant) {
  const auto t = mb_e1_table(a, equivariant);
  auto c = t.counts();
  const int L = int(a.size());
  const int bottom = L == 0 ? 0 : (equivariant ? 3 - 2 * L : 2 - 2 * L);
  std::vector<std::pair<int, int>> out;
  for (int d = 2; d >= bottom; --d) out.push_back({d, c.count(d) ? c[d] : 0});
  return out;
}

GeneratorTable mb_e1_table(const std::vector<int>& a, bool equivariant) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 1) throw ConfigError("a-sequence entries must be positive");
    if (i > 0 && a[i] < a[i - 1]) throw ConfigError("a-sequence must be nondecreasing");
  }
  const int L = int(a.size());
  const int bottom = L == 0 ? 0 : (equivariant ? 3 - 2 * L : 2 - 2 * L);
  GeneratorTable t;
  auto morse = [&](int deg, int copy) {
    Generator g;
    g.id = "m" + std::to_string(deg) + (copy ? "'" : "");
    g.degree = deg;
    g.kind = GeneratorKind::morse;
    g.morse_index = deg;
    g.homotopy = "0";
    t.entries.push_back(g);
  };
  if (equivariant) {
    for (int d = 2; d >= bottom; d -= 2) morse(d, 0);
    for (int d = 0; d >= bottom; d -= 2) morse(d, 1);
  } else {
    morse(2, 0);
    morse(0, 0);
  }
  int count = 0;
  for (int k = 0; k < L; ++k) {
    const int mu = 2 * k + 1;
    for (int j = 0; j < a[k]; ++j) {
      ++count;
      for (int sign = equivariant ? 1 : 0; sign < 2; ++sign) {
        Generator g;
        g.id = "x" + std::to_string(count) + (equivariant ? "" : (sign ? "+" : "-"));
        g.degree = (sign ? 2 : 1) - mu;
        g.period = double(count);
        g.kind = sign ? GeneratorKind::orbit_plus : GeneratorKind::orbit_minus;
        g.orbit = "x" + std::to_string(count);
        g.iterate = 1;
        g.mu_bar = mu;
        g.homotopy = "0";
        t.entries.push_back(g);
      }
    }
  }
  return t;
}

DeltaWindow delta_window(int m) {
  if (m < 1) throw ConfigError("window index must be at least 1");
  DeltaWindow w;
  w.low = Rational(m, 2LL * m);
  w.high = Rational(m + 1, 2LL * m + 1);
  w.limit = Rational(1, 2);
  return w;
}

DeltaWindow delta_window_intersection(int M) {
  DeltaWindow w = delta_window(1);
  for (int m = 2; m <= M; ++m) {
    const auto x = delta_window(m);
    if (w.low < x.low) w.low = x.low;
    if (x.high < w.high) w.high = x.high;
  }
  w.limit = Rational(1, 2);
  w.rational_limit = true;
  w.note = "intervals shrink to 1/2: rational limit contradicts an irrational rotation number";
  return w;
}

bool nested_monotone(const std::vector<GeneratorTable>& tables, std::string* reason) {
  int prev_rank = -1;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    if (k > 0) {
      for (const auto& g : tables[k - 1].entries)
        if (tables[k].find(g.id) < 0) {
          if (reason) *reason = "table " + std::to_string(k) + " drops generator " + g.id;
          return false;
        }
    }
    const auto sk = build_skeleton(tables[k]);
    const int r = structural_rank(tables[k], sk.d, 1, 2);
    if (r < prev_rank) {
      if (reason) *reason = "structural rank of d out of degree 1 decreases at table " + std::to_string(k);
      return false;
    }
    prev_rank = r;
  }
  if (reason) *reason = "nested with nondecreasing rank bound";
  return true;
}

}  // namespace magnetolab
