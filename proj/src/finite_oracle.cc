#include "chainrec/finite_oracle.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "chainrec/errors.h"

namespace chainrec::finite {

namespace {

constexpr std::size_t kMaxClosure = 1000000;
constexpr int kConjugacyTrials = 5;

StateSet single(std::size_t x) { return StateSet{1} << x; }

StateSet image_set(const StateMap& m, StateSet s) {
  StateSet out = 0;
  for (std::size_t x = 0; x < m.size(); ++x) {
    if (has(s, x)) out |= single(m[x]);
  }
  return out;
}

// Closure of s under the chosen generators (plus the identity).
StateSet forward_closure(const std::vector<const StateMap*>& gens, StateSet s) {
  StateSet seen = s;
  for (StateSet frontier = s; frontier != 0;) {
    StateSet next = 0;
    for (const StateMap* g : gens) next |= image_set(*g, frontier);
    frontier = next & ~seen;
    seen |= next;
  }
  return seen;
}

std::vector<const StateMap*> generators_except(const FiniteSystem& sys, std::size_t skip) {
  std::vector<const StateMap*> out;
  for (std::size_t i = 0; i < sys.generators.size(); ++i) {
    if (i != skip) out.push_back(&sys.generators[i]);
  }
  return out;
}

// Union of the eventual cycle of W_0 = H(start), W_{k+1} = H(g(W_k)).
StateSet eventual_union(const std::vector<const StateMap*>& h_gens, const StateMap& g,
                        StateSet start) {
  std::map<StateSet, std::size_t> seen;
  std::vector<StateSet> seq;
  StateSet w = forward_closure(h_gens, start);
  while (!seen.count(w)) {
    seen.emplace(w, seq.size());
    seq.push_back(w);
    w = forward_closure(h_gens, image_set(g, w));
  }
  StateSet out = 0;
  for (std::size_t i = seen[w]; i < seq.size(); ++i) out |= seq[i];
  return out;
}

StateSet relabel(StateSet s, const std::vector<std::uint32_t>& rho) {
  StateSet out = 0;
  for (auto x : members(s)) out |= single(rho[x]);
  return out;
}

nlohmann::json set_json(StateSet s) { return members(s); }

}  // namespace

std::vector<std::uint32_t> members(StateSet s) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t x = 0; s != 0; ++x, s >>= 1) {
    if (s & 1U) out.push_back(x);
  }
  return out;
}

void FiniteSystem::validate() const {
  if (n < 1 || n > kMaxStates) throw ConfigError("finite system size must lie in [1, 8]");
  if (generators.empty()) throw ConfigError("finite system has no generators");
  if (dist.size() != n) throw ConfigError("dist must be an n x n matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i].size() != n) throw ConfigError("dist must be an n x n matrix");
    if (dist[i][i] != 0.0) throw ConfigError("dist diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist[i][j];
      if (!std::isfinite(d) || d < 0.0) throw ConfigError("dist entries must be finite and >= 0");
      if (i != j && !(d > 0.0)) throw ConfigError("distinct states must have positive distance");
      if (d != dist[j][i]) throw ConfigError("dist must be symmetric");
      for (std::size_t k = 0; k < n; ++k) {
        if (d > dist[i][k] + dist[k][j] + 1e-9 * (1.0 + d)) {
          throw ConfigError("dist violates the triangle inequality");
        }
      }
    }
  }
  for (const auto& g : generators) {
    if (g.size() != n) throw ConfigError("generator table length must equal n");
    for (auto v : g) {
      if (v >= n) throw ConfigError("generator table entry out of range");
    }
  }
}

StateMap compose(const StateMap& outer, const StateMap& inner) {
  StateMap out(inner.size());
  for (std::size_t x = 0; x < inner.size(); ++x) out[x] = outer[inner[x]];
  return out;
}

StateMap identity_map(std::size_t n) {
  StateMap out(n);
  std::iota(out.begin(), out.end(), std::uint8_t{0});
  return out;
}

StateSet image(const StateMap& m, StateSet s) { return image_set(m, s); }

MonoidClosure monoid_closure(const FiniteSystem& sys) {
  sys.validate();
  MonoidClosure out;
  std::set<StateMap> seen;
  std::deque<std::size_t> queue;
  auto add = [&](StateMap m) {
    if (!seen.insert(m).second) return;
    if (seen.size() > kMaxClosure) throw BudgetError("monoid closure exceeds 1e6 elements");
    out.elements.push_back(std::move(m));
    queue.push_back(out.elements.size() - 1);
  };
  for (const auto& g : sys.generators) add(g);
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (const auto& g : sys.generators) add(compose(g, out.elements[i]));
  }
  out.contains_identity = seen.count(identity_map(sys.n)) > 0;
  return out;
}

bool is_abelian(const FiniteSystem& sys) {
  for (std::size_t i = 0; i < sys.generators.size(); ++i) {
    for (std::size_t j = i + 1; j < sys.generators.size(); ++j) {
      if (compose(sys.generators[i], sys.generators[j]) != compose(sys.generators[j], sys.generators[i])) {
        return false;
      }
    }
  }
  return true;
}

// ------------------------------------------------------------- ChainOracle

ChainOracle::ChainOracle(const FiniteSystem& sys) : sys_(sys), closure_(monoid_closure(sys)) {
  const std::size_t n = sys.n;
  orbit_.assign(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    orbit_[x] = single(x);
    for (const auto& m : closure_.elements) orbit_[x] |= single(m[x]);
  }
  reach_.resize(closure_.elements.size());
  for (std::size_t mi = 0; mi < closure_.elements.size(); ++mi) {
    const StateMap& m = closure_.elements[mi];
    std::vector<StateSet> step(n);
    for (std::size_t y = 0; y < n; ++y) step[y] = orbit_[m[y]];
    std::vector<StateSet> r = step;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t y = 0; y < n; ++y) {
        StateSet next = r[y];
        for (auto z : members(r[y])) next |= step[z];
        if (next != r[y]) {
          r[y] = next;
          changed = true;
        }
      }
    }
    reach_[mi] = std::move(r);
  }
}

StateSet ChainOracle::orbit(StateSet s) const {
  StateSet out = 0;
  for (auto x : members(s)) out |= orbit_[x];
  return out;
}

StateSet ChainOracle::chain_recurrent() const {
  StateSet out = 0;
  for (std::size_t x = 0; x < sys_.n; ++x) {
    bool ok = true;
    for (const auto& r : reach_) ok = ok && has(r[x], x);
    if (ok) out |= single(x);
  }
  return out;
}

bool ChainOracle::chain_equivalent(std::size_t a, std::size_t b) const {
  return std::all_of(reach_.begin(), reach_.end(),
                     [&](const auto& r) { return has(r[a], b) && has(r[b], a); });
}

std::vector<StateSet> ChainOracle::components() const {
  std::vector<StateSet> out;
  StateSet left = chain_recurrent();
  while (left != 0) {
    const auto a = static_cast<std::size_t>(std::countr_zero(left));
    StateSet cls = 0;
    for (auto b : members(left)) {
      if (chain_equivalent(a, b)) cls |= single(b);
    }
    out.push_back(cls);
    left &= ~cls;
  }
  return out;
}

bool ChainOracle::chain_transitive(StateSet a) const {
  if (a == 0) return false;
  for (const auto& r : reach_) {
    for (auto x : members(a)) {
      if ((r[x] & a) != a) return false;
    }
  }
  return true;
}

StateSet exact_CR(const ChainOracle& oracle) { return oracle.chain_recurrent(); }

std::vector<StateSet> exact_chain_components(const ChainOracle& oracle) {
  return oracle.components();
}

ExactTransitivity exact_transitivity(const ChainOracle& oracle) {
  const std::size_t n = oracle.system().n;
  const StateSet all = full_set(n);
  ExactTransitivity out;
  out.topological = true;
  for (std::size_t x = 0; x < n; ++x) {
    if (oracle.orbit(x) == all) {
      if (!out.dense_orbit) out.dense_orbit = static_cast<std::uint32_t>(x);
    } else {
      out.topological = false;
    }
  }
  out.chain = oracle.chain_transitive(all);
  return out;
}

FiniteSystem conjugate_system(const FiniteSystem& sys, const std::vector<std::uint32_t>& rho) {
  sys.validate();
  const std::size_t n = sys.n;
  if (rho.size() != n) throw ConfigError("rho must have one entry per state");
  std::vector<std::uint32_t> inv(n, static_cast<std::uint32_t>(n));
  for (std::size_t x = 0; x < n; ++x) {
    if (rho[x] >= n || inv[rho[x]] != n) throw ConfigError("rho is not a bijection");
    inv[rho[x]] = static_cast<std::uint32_t>(x);
  }
  FiniteSystem out;
  out.n = n;
  out.dist.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) out.dist[rho[x]][rho[y]] = sys.dist[x][y];
  }
  for (const auto& g : sys.generators) {
    StateMap t(n);
    for (std::size_t y = 0; y < n; ++y) t[y] = static_cast<std::uint8_t>(rho[g[inv[y]]]);
    out.generators.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------- duality

StateSet exact_attractor(const FiniteSystem& sys, StateSet U, const StateMap& h, std::size_t alpha0) {
  if (alpha0 >= sys.generators.size()) throw ConfigError("alpha0 is not a generator index");
  return eventual_union(generators_except(sys, alpha0), sys.generators[alpha0], image_set(h, U));
}

StateSet exact_omega(const FiniteSystem& sys, std::size_t x, std::size_t alpha0) {
  if (alpha0 >= sys.generators.size()) throw ConfigError("alpha0 is not a generator index");
  return eventual_union(generators_except(sys, alpha0), sys.generators[alpha0], single(x));
}

ExactDuality exact_duality(const ChainOracle& oracle) {
  const FiniteSystem& sys = oracle.system();
  const std::size_t n = sys.n;
  const std::size_t k = sys.generators.size();
  const auto& elems = oracle.closure().elements;
  ExactDuality out;
  out.abelian = is_abelian(sys);
  out.asserted = out.abelian;
  out.cr = oracle.chain_recurrent();

  // Trapping regions: nonempty U with G-hat(h(U)) inside U for some h in G.
  std::vector<std::pair<StateSet, std::size_t>> traps;
  for (StateSet U = 1; U <= full_set(n); ++U) {
    bool any = false;
    for (std::size_t hi = 0; hi < elems.size(); ++hi) {
      if ((oracle.orbit(image_set(elems[hi], U)) & ~U) == 0) {
        traps.emplace_back(U, hi);
        any = true;
      }
    }
    out.trapping_regions += any;
  }

  const StateSet complement = full_set(n) & ~out.cr;
  out.equal = true;
  for (std::size_t a0 = 0; a0 < k; ++a0) {
    std::vector<StateSet> omega(n);
    for (std::size_t x = 0; x < n; ++x) omega[x] = exact_omega(sys, x, a0);
    std::set<StateSet> done;
    StateSet united = 0;
    for (const auto& [U, hi] : traps) {
      const StateSet A = exact_attractor(sys, U, elems[hi], a0);
      if (!done.insert(A).second) continue;
      StateSet b = 0;
      for (std::size_t x = 0; x < n; ++x) {
        if (omega[x] & A) b |= single(x);
      }
      united |= b & ~A;
      out.attractors.push_back({U, hi, a0, A, b});
    }
    out.union_per_alpha0.push_back(united);
    out.equal = out.equal && united == complement;
  }
  out.union_basin_minus_attractor = out.union_per_alpha0.front();
  return out;
}

// ----------------------------------------------------------------- random

FiniteSystem random_system(std::mt19937_64& rng, std::size_t n, std::size_t generator_count,
                           bool abelian) {
  if (n < 1 || n > kMaxStates) throw ConfigError("random system size must lie in [1, 8]");
  if (generator_count < 1) throw ConfigError("random system needs a generator");
  FiniteSystem sys;
  sys.n = n;
  std::uniform_int_distribution<int> weight(1, 9);
  sys.dist.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sys.dist[i][j] = sys.dist[j][i] = weight(rng);
  }
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        sys.dist[i][j] = std::min(sys.dist[i][j], sys.dist[i][m] + sys.dist[m][j]);
      }
    }
  }

  std::uniform_int_distribution<std::size_t> state(0, n - 1);
  const StateMap id = identity_map(n);
  auto random_map = [&] {
    StateMap m(n);
    for (auto& v : m) v = static_cast<std::uint8_t>(state(rng));
    return m;
  };
  if (!abelian) {
    for (std::size_t i = 0; i < generator_count; ++i) sys.generators.push_back(random_map());
    return sys;
  }
  StateMap first = random_map();
  while (n > 1 && first == id) first = random_map();
  sys.generators.push_back(first);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= n;
  while (sys.generators.size() < generator_count) {
    std::vector<StateMap> candidates;
    StateMap m(n, 0);
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t x = 0; x < n; ++x, c /= n) m[x] = static_cast<std::uint8_t>(c % n);
      if (m == id && n > 1) continue;
      const bool commutes = std::all_of(sys.generators.begin(), sys.generators.end(),
                                        [&](const StateMap& g) { return compose(g, m) == compose(m, g); });
      if (commutes) candidates.push_back(m);
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    sys.generators.push_back(candidates[pick(rng)]);
  }
  return sys;
}

// ------------------------------------------------------------------ sweep

nlohmann::json oracle_seed_report(std::uint64_t seed, std::size_t n_max, bool abelian_only) {
  if (n_max < 2 || n_max > kMaxStates) throw ConfigError("n_max must lie in [2, 8]");
  std::mt19937_64 rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(2, n_max)(rng);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  const FiniteSystem sys = random_system(rng, n, k, abelian_only);

  nlohmann::json rec;
  rec["seed"] = seed;
  rec["n"] = n;
  rec["generators"] = sys.generators;
  const bool abelian = is_abelian(sys);
  rec["abelian"] = abelian;

  std::optional<ChainOracle> oracle;
  try {
    oracle.emplace(sys);
  } catch (const BudgetError& e) {
    rec["skipped"] = e.what();
    return rec;
  }
  rec["closure_size"] = oracle->closure().elements.size();
  const StateSet cr = oracle->chain_recurrent();
  const auto comps = oracle->components();
  const ExactTransitivity tr = exact_transitivity(*oracle);
  rec["cr"] = set_json(cr);
  nlohmann::json cj = nlohmann::json::array();
  for (auto c : comps) cj.push_back(set_json(c));
  rec["components"] = cj;
  rec["topological"] = tr.topological;
  rec["chain"] = tr.chain;
  rec["dense_orbit"] = tr.dense_orbit ? nlohmann::json(*tr.dense_orbit) : nlohmann::json(nullptr);

  nlohmann::json props;
  // Chain equivalence is an equivalence relation on CR.
  bool equivalence = true;
  const auto crm = members(cr);
  for (auto a : crm) {
    equivalence = equivalence && oracle->chain_equivalent(a, a);
    for (auto b : crm) {
      equivalence = equivalence && oracle->chain_equivalent(a, b) == oracle->chain_equivalent(b, a);
      for (auto c : crm) {
        if (oracle->chain_equivalent(a, b) && oracle->chain_equivalent(b, c)) {
          equivalence = equivalence && oracle->chain_equivalent(a, c);
        }
      }
    }
  }
  props["equivalence"] = equivalence;

  StateSet covered = 0;
  bool disjoint = true;
  for (auto c : comps) {
    disjoint = disjoint && (covered & c) == 0;
    covered |= c;
  }
  props["partition"] = disjoint && covered == cr;

  bool invariant = true;
  for (const auto& g : sys.generators) invariant = invariant && (image_set(g, cr) & ~cr) == 0;
  for (auto c : comps) {
    for (const auto& g : sys.generators) invariant = invariant && (image_set(g, c) & ~c) == 0;
  }
  props["invariance"] = abelian ? nlohmann::json(invariant) : nlohmann::json(nullptr);

  bool maximal = true;
  for (auto c : comps) {
    maximal = maximal && oracle->chain_transitive(c);
    for (std::size_t x = 0; x < n; ++x) {
      if (!has(c, x)) maximal = maximal && !oracle->chain_transitive(c | single(x));
    }
  }
  props["maximality"] = maximal;

  bool transported = true;
  for (int trial = 0; trial < kConjugacyTrials; ++trial) {
    std::vector<std::uint32_t> rho(n);
    std::iota(rho.begin(), rho.end(), 0U);
    std::shuffle(rho.begin(), rho.end(), rng);
    const ChainOracle conj(conjugate_system(sys, rho));
    const ExactTransitivity trc = exact_transitivity(conj);
    std::set<StateSet> comps_rho;
    for (auto c : comps) comps_rho.insert(relabel(c, rho));
    const auto comps_conj = conj.components();
    transported = transported && conj.chain_recurrent() == relabel(cr, rho) &&
                  comps_rho == std::set<StateSet>(comps_conj.begin(), comps_conj.end()) &&
                  trc.topological == tr.topological && trc.chain == tr.chain &&
                  trc.dense_orbit.has_value() == tr.dense_orbit.has_value();
  }
  props["conjugacy"] = transported;

  props["topological_implies_chain"] =
      abelian ? nlohmann::json(!tr.topological || tr.chain) : nlohmann::json(nullptr);

  const ExactDuality dual = exact_duality(*oracle);
  rec["duality"] = {{"complement_cr", set_json(full_set(n) & ~cr)},
                    {"union_basin_minus_attractor", set_json(dual.union_basin_minus_attractor)},
                    {"equal", dual.equal},
                    {"asserted", dual.asserted},
                    {"trapping_regions", dual.trapping_regions},
                    {"attractors", dual.attractors.size()}};
  props["duality"] = dual.asserted ? nlohmann::json(dual.equal) : nlohmann::json(nullptr);
  rec["properties"] = props;

  bool pass = true;
  for (const auto& [key, value] : props.items()) {
    if (value.is_boolean() && !value.get<bool>()) pass = false;
  }
  rec["pass"] = pass;
  return rec;
}

nlohmann::json to_json(const FiniteSystem& sys) {
  return {{"n", sys.n}, {"dist", sys.dist}, {"generators", sys.generators}};
}

FiniteSystem finite_system_from_json(const nlohmann::json& j) {
  FiniteSystem sys;
  try {
    sys.n = j.at("n").get<std::size_t>();
    sys.dist = j.at("dist").get<std::vector<std::vector<double>>>();
    for (const auto& g : j.at("generators")) {
      StateMap t;
      for (const auto& v : g) {
        const auto x = v.get<std::int64_t>();
        if (x < 0 || x > 255) throw ConfigError("generator table entry out of range");
        t.push_back(static_cast<std::uint8_t>(x));
      }
      sys.generators.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("finite system JSON: ") + e.what());
  }
  sys.validate();
  return sys;
}

}  // namespace chainrec::finite
