#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace chainrec::finite {

// Self-map of {0, ..., n-1} as a lookup table.
using StateMap = std::vector<std::uint8_t>;
// Subset of states as a bitmask (bit x = state x).
using StateSet = std::uint32_t;

constexpr std::size_t kMaxStates = 8;

inline bool has(StateSet s, std::size_t x) { return ((s >> x) & 1U) != 0; }
inline StateSet full_set(std::size_t n) { return n >= 32 ? ~StateSet{0} : (StateSet{1} << n) - 1; }
std::vector<std::uint32_t> members(StateSet s);

// Finite metric space with a finitely generated semigroup of self-maps.
struct FiniteSystem {
  std::size_t n = 0;
  std::vector<std::vector<double>> dist;
  std::vector<StateMap> generators;

  // Throws ConfigError unless n in [1, 8], dist is a metric, and tables are total.
  void validate() const;
};

StateMap compose(const StateMap& outer, const StateMap& inner);  // outer o inner
StateMap identity_map(std::size_t n);
StateSet image(const StateMap& m, StateSet s);

// Distinct composites of the generators, in breadth-first discovery order
// (generators first, then left multiplication by generators).
struct MonoidClosure {
  std::vector<StateMap> elements;
  bool contains_identity = false;  // identity arises as a composite
};

// Throws BudgetError past 1e6 elements.
MonoidClosure monoid_closure(const FiniteSystem& sys);

bool is_abelian(const FiniteSystem& sys);

// Precomputed exact chain structure. With eps below the smallest nonzero
// distance, an (eps, m)-chain step is y -> f(m(y)) for f in G-hat.
class ChainOracle {
 public:
  explicit ChainOracle(const FiniteSystem& sys);

  const FiniteSystem& system() const { return sys_; }
  const MonoidClosure& closure() const { return closure_; }

  // {f(x) : f in G-hat}.
  StateSet orbit(std::size_t x) const { return orbit_[x]; }
  StateSet orbit(StateSet s) const;

  // States reachable from x by chains of length >= 1 for test map closure[m].
  StateSet chain_reach(std::size_t m, std::size_t x) const { return reach_[m][x]; }

  StateSet chain_recurrent() const;
  bool chain_equivalent(std::size_t a, std::size_t b) const;
  // Classes of chain_recurrent() ordered by smallest member.
  std::vector<StateSet> components() const;
  bool chain_transitive(StateSet a) const;

 private:
  FiniteSystem sys_;
  MonoidClosure closure_;
  std::vector<StateSet> orbit_;
  std::vector<std::vector<StateSet>> reach_;
};

StateSet exact_CR(const ChainOracle& oracle);
std::vector<StateSet> exact_chain_components(const ChainOracle& oracle);

struct ExactTransitivity {
  bool topological = false;
  bool chain = false;
  std::optional<std::uint32_t> dense_orbit;  // smallest such state
};
ExactTransitivity exact_transitivity(const ChainOracle& oracle);

// g~ = rho o g o rho^-1 and dist'(rho x, rho y) = dist(x, y).
FiniteSystem conjugate_system(const FiniteSystem& sys, const std::vector<std::uint32_t>& rho);

// Attractor of a trapping region U (with witness h) for designated generator
// alpha0: the states hit by infinitely many of the sets W_k, where W_0 is the
// H-orbit of h(U), W_{k+1} the H-orbit of g_alpha0(W_k), and H the monoid of
// the other generators plus the identity.
StateSet exact_attractor(const FiniteSystem& sys, StateSet U, const StateMap& h, std::size_t alpha0);
StateSet exact_omega(const FiniteSystem& sys, std::size_t x, std::size_t alpha0);

struct ExactAttractor {
  StateSet U = 0;
  std::size_t h = 0;  // index into the closure
  std::size_t alpha0 = 0;
  StateSet A = 0;
  StateSet basin = 0;
};

struct ExactDuality {
  StateSet cr = 0;
  StateSet union_basin_minus_attractor = 0;  // for alpha0 = 0
  bool equal = false;                        // both sides agree for every alpha0
  bool abelian = false;
  bool asserted = false;  // equality is a theorem claim only for abelian input
  std::vector<StateSet> union_per_alpha0;
  std::vector<ExactAttractor> attractors;
  std::size_t trapping_regions = 0;
};

ExactDuality exact_duality(const ChainOracle& oracle);

// Random systems. The metric is the shortest-path metric of random integer
// edge weights in [1, 9] on the complete graph. Abelian systems draw each
// further generator uniformly from the non-identity maps commuting with all
// previous ones.
FiniteSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t generator_count,
                           bool abelian);

// Per-seed property record used by the oracle sweep.
nlohmann::json oracle_seed_report(std::uint64_t seed, std::size_t n_max, bool abelian_only);

nlohmann::json to_json(const FiniteSystem& sys);
FiniteSystem finite_system_from_json(const nlohmann::json& j);

}  // namespace chainrec::finite
