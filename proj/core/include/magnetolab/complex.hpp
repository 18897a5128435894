#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "magnetolab/linearization.hpp"

namespace magnetolab {

// Exact fraction with a positive denominator.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1);
  double value() const { return double(num) / double(den); }
  std::string str() const;
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Rational& a, const Rational& b);
};

// ---------------------------------------------------------------------------
// Generator tables

enum class GeneratorKind { orbit_minus, orbit_plus, morse };

struct Generator {
  std::string id;
  int degree = 0;
  double period = 0.0;  // 0 for Morse generators
  GeneratorKind kind = GeneratorKind::morse;
  std::string orbit;    // prime orbit name
  int iterate = 0;
  int mu_bar = 0;       // of the iterate
  int morse_index = 0;
  bool good = true;
  std::string homotopy;
};

struct GeneratorTable {
  std::vector<Generator> entries;

  // Generator count per degree.
  std::map<int, int> counts() const;
  // Degrees from the highest to the lowest entry, one per generator.
  std::vector<int> degree_sequence() const;
  int find(const std::string& id) const;  // -1 when absent
};

struct OrbitInput {
  std::string id;
  OrbitIndexData data;
  double period = 0.0;
  std::string homotopy = "0";
};

struct MorseSpec {
  std::vector<int> indices;
  static MorseSpec none() { return {}; }
  static MorseSpec sphere() { return {{2, 0}}; }
  static MorseSpec torus() { return {{2, 1, 1, 0}}; }
};

// All iterates with period <= cutoff, each contributing x_- and x_+ with
// degrees grading(mu_bar(x^k), n), plus the Morse generators.
GeneratorTable build_table(const std::vector<OrbitInput>& orbits, double cutoff, const MorseSpec& morse, int n = 2);

// ---------------------------------------------------------------------------
// Structured differentials

enum class EntryState { fixed, unknown, forced_zero };

struct Entry {
  EntryState state = EntryState::forced_zero;
  Rational value;              // fixed entries
  bool sign_ambiguous = false;  // fixed +-value
  bool zero() const { return state == EntryState::forced_zero || (state == EntryState::fixed && value.num == 0); }
};

// d[j][i] = <d g_i, g_j> (degree +1) and delta[j][i] = <Delta g_i, g_j> (degree -1),
// indexed by table position.
struct StructuredDifferential {
  std::vector<std::vector<Entry>> d;
  std::vector<std::vector<Entry>> delta;
};

StructuredDifferential build_skeleton(const GeneratorTable& table);

// Largest rank any completion of the block from degree `from` can have
// (maximum matching on the entries that are not structurally zero).
int structural_rank(const GeneratorTable& table, const std::vector<std::vector<Entry>>& m, int from, int to);

// ---------------------------------------------------------------------------
// Feasibility

struct InjectivityResult {
  bool injective = false;
  std::vector<std::string> pivots;  // degree-2 generators by decreasing period
  std::string offending;
  std::string reason;
};

// Delta from degree 2 to degree 1 on orbit generators (Morse generators are
// constant loops and are left out).
InjectivityResult delta_injective_top(const GeneratorTable& table);

struct FeasibilityResult {
  bool feasible = false;
  std::map<int, int> ranks;  // rank of d leaving each degree
  int window_high = 0;       // violated degrees (window_high, window_high - 1)
  int window_low = 0;
  std::string reason;
};

// Ranks r_d of d_d: C_d -> C_{d+1} with r_d + r_{d-1} + target_d = dim C_d and
// 0 <= r_d <= min(dim C_d, dim C_{d+1}, cap_d). With bottom_open the lowest
// degree may be fed by generators below the table.
FeasibilityResult acyclicity_feasible(const std::map<int, int>& counts, const std::map<int, int>& target,
                                      const std::map<int, int>& caps = {}, bool bottom_open = true);
// Same with caps taken from the structural ranks of the table's skeleton.
FeasibilityResult acyclicity_feasible(const GeneratorTable& table, const std::map<int, int>& target,
                                      bool bottom_open = true);

struct BvScenario {
  std::vector<std::string> sources;  // the x_+ spanning the cycle candidate y
  std::map<int, int> target;         // cohomology of the full complex (default acyclic)
  int enumerate_limit = 12;          // brute-force completions only below this many unknowns
};

struct BvReport {
  bool contradiction = false;
  std::vector<std::string> steps;
  std::string reason;
  bool enumerated = false;
  long long completions_checked = 0;
  long long consistent_completions = 0;  // d^2 = 0, dDelta + Delta d = 0 and the target cohomology
                                         // (at least the target in the lowest, open degree)
};

BvReport bv_obstruction(const GeneratorTable& table, const BvScenario& scenario);

// Chain-compatible completions of the skeleton with unknowns in `values` and
// sign choices for +-fixed entries; stops after `limit` completions.
struct Completion {
  Eigen::MatrixXd d, delta;
};
std::vector<Completion> enumerate_completions(const GeneratorTable& table, const StructuredDifferential& sk,
                                              const std::vector<int>& values, std::size_t limit);

// Cohomology dimensions per degree of a completed differential.
std::map<int, int> cohomology(const GeneratorTable& table, const Eigen::MatrixXd& d);

// ---------------------------------------------------------------------------
// Morse-Bott E1 counts

// a[k] = number of orbits with mu_bar = 2k+1. Entries from degree 2 downward.
std::vector<std::pair<int, int>> mb_e1_counts(const std::vector<int>& a, bool equivariant);
// A table realising these counts: Morse generators at period 0, orbit
// generators with increasing periods.
GeneratorTable mb_e1_table(const std::vector<int>& a, bool equivariant);

struct DeltaWindow {
  Rational low;
  Rational high;
  Rational limit;
  bool rational_limit = false;
  std::string note;
};
// The open interval (m/(2m), (m+1)/(2m+1)).
DeltaWindow delta_window(int m);
// Intersection over 1..M together with the limiting point.
DeltaWindow delta_window_intersection(int M);

// Nested tables (growing cutoff): each must contain the previous one and the
// structural rank of d out of degree 1 must not decrease.
bool nested_monotone(const std::vector<GeneratorTable>& tables, std::string* reason = nullptr);

}  // namespace magnetolab
