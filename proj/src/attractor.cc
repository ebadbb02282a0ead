#include "chainrec/attractor.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "chainrec/boxset_io.h"
#include "chainrec/errors.h"
#include "chainrec/parallel.h"

namespace chainrec {

namespace {

constexpr double kMaxBoxEvaluations = 1e8;
constexpr std::size_t kBlock = 16384;
constexpr std::uint32_t kFar = std::numeric_limits<std::uint32_t>::max();

void check_budget(std::size_t cells, std::size_t words, const char* what) {
  if (static_cast<double>(cells) * static_cast<double>(words) > kMaxBoxEvaluations) {
    throw BudgetError(std::string(what) + " needs " + std::to_string(cells) + " cells x " +
                      std::to_string(words) + " words of box evaluations, over the 1e8 cap");
  }
}

void check_generator(const GeneratorSystem& sys, std::uint32_t alpha0) {
  if (alpha0 >= sys.size()) throw ConfigError("alpha0 " + std::to_string(alpha0) + " is not a generator index");
}

// Cells meeting the union over b in s and selected words w of w(base(b)),
// where base defaults to the cell box. Words share prefixes through their
// suffix indices; `use[t]` selects which words contribute.
BoxSet image_cover(const Grid& grid, const GeneratorSystem& sys, const BoxSet& s,
                   const std::vector<Word>& words, const std::vector<std::uint8_t>& use,
                   const Word& pre) {
  const std::vector<std::int64_t> suffix = suffix_indices(words);
  std::size_t used = 0;
  for (auto u : use) used += u;
  RectCover cover(grid);
  std::vector<IntervalBox2> block;
  for (std::size_t start = 0; start < s.size(); start += kBlock) {
    const std::size_t count = std::min(kBlock, s.size() - start);
    block.assign(count * used, IntervalBox2{});
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
      std::vector<IntervalBox2> images(words.size());
      for (std::size_t i = begin; i < end; ++i) {
        images[0] = word_box_image(sys, pre, grid.cell_box(s.ids()[start + i]));
        std::size_t slot = i * used;
        if (use[0]) block[slot++] = images[0];
        for (std::size_t t = 1; t < words.size(); ++t) {
          images[t] = eval_box(sys.generators[words[t].indices().front()],
                               images[static_cast<std::size_t>(suffix[t])]);
          if (use[t]) block[slot++] = images[t];
        }
      }
    });
    for (const auto& r : block) cover.add(r);
  }
  return cover.cells();
}

// Dense index of every retained cell plus its per-generator cell-level images.
class ImageGraph {
 public:
  ImageGraph(const Grid& grid, const GeneratorSystem& sys)
      : cells_(BoxSet::all(grid)), k_(sys.size()) {
    const std::size_t n = cells_.size();
    index_.assign(grid.lattice_size(), kFar);
    for (std::size_t v = 0; v < n; ++v) index_[cells_.ids()[v]] = static_cast<std::uint32_t>(v);
    std::vector<std::vector<std::uint32_t>> lists(n * k_);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t v = begin; v < end; ++v) {
        const IntervalBox2 box = grid.cell_box(cells_.ids()[v]);
        for (std::size_t i = 0; i < k_; ++i) {
          const auto range = grid.cells_meeting(eval_box(sys.generators[i], box));
          if (!range) continue;
          auto& out = lists[v * k_ + i];
          for (std::uint32_t iy = range->iy0; iy <= range->iy1; ++iy) {
            for (std::uint32_t ix = range->ix0; ix <= range->ix1; ++ix) {
              const std::uint32_t w = index_[grid.id(Cell{ix, iy})];
              if (w != kFar) out.push_back(w);
            }
          }
        }
      }
    });
    offsets_.assign(n * k_ + 1, 0);
    for (std::size_t j = 0; j < lists.size(); ++j) offsets_[j + 1] = offsets_[j] + lists[j].size();
    targets_.reserve(offsets_.back());
    for (auto& l : lists) targets_.insert(targets_.end(), l.begin(), l.end());
  }

  const BoxSet& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  std::size_t generators() const { return k_; }
  std::uint32_t index(CellId id) const { return index_[id]; }

  std::span<const std::uint32_t> targets(std::size_t v, std::size_t gen) const {
    const std::size_t j = v * k_ + gen;
    return {targets_.data() + offsets_[j], targets_.data() + offsets_[j + 1]};
  }

  // Reverse adjacency: for target w and generator i, the sources v.
  void reverse(std::vector<std::uint64_t>& offsets, std::vector<std::uint32_t>& sources) const {
    const std::size_t n = size();
    offsets.assign(n * k_ + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < k_; ++i) {
        for (auto w : targets(v, i)) ++offsets[w * k_ + i + 1];
      }
    }
    for (std::size_t j = 0; j < n * k_; ++j) offsets[j + 1] += offsets[j];
    sources.assign(offsets.back(), 0);
    std::vector<std::uint64_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < k_; ++i) {
        for (auto w : targets(v, i)) sources[fill[w * k_ + i]++] = static_cast<std::uint32_t>(v);
      }
    }
  }

 private:
  BoxSet cells_;
  std::size_t k_;
  std::vector<std::uint32_t> index_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> targets_;
};

std::vector<CellId> cells_of_range(const Grid& grid, const std::optional<CellRange>& range) {
  std::vector<CellId> out;
  if (!range) return out;
  for (std::uint32_t iy = range->iy0; iy <= range->iy1; ++iy) {
    for (std::uint32_t ix = range->ix0; ix <= range->ix1; ++ix) {
      if (grid.retained(Cell{ix, iy})) out.push_back(grid.id(Cell{ix, iy}));
    }
  }
  return out;
}

// Multi-source BFS over the 8-neighbour lattice graph: Chebyshev distance in
// cells from every lattice cell to the nearest member of s.
std::vector<std::uint32_t> chebyshev_distance(const BoxSet& s) {
  const Grid& grid = s.grid();
  grid.require_dense("chebyshev_distance");
  const auto n = static_cast<std::int64_t>(grid.side());
  std::vector<std::uint32_t> dist(grid.lattice_size(), kFar);
  std::deque<CellId> queue;
  for (CellId id : s) {
    dist[id] = 0;
    queue.push_back(id);
  }
  while (!queue.empty()) {
    const CellId id = queue.front();
    queue.pop_front();
    const Cell c = grid.cell(id);
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const std::int64_t x = c.ix + dx;
        const std::int64_t y = c.iy + dy;
        if (x < 0 || y < 0 || x >= n || y >= n) continue;
        const CellId nb = grid.id(Cell{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)});
        if (dist[nb] != kFar) continue;
        dist[nb] = dist[id] + 1;
        queue.push_back(nb);
      }
    }
  }
  return dist;
}

}  // namespace

// ----------------------------------------------------------------- trapping

TrappingResult certify_trapping(const Grid& grid, const GeneratorSystem& sys, const BoxSet& U,
                                const Word& h, int L) {
  if (U.empty()) throw ConfigError("trapping candidate U is empty");
  if (h.is_identity()) throw ConfigError("h must be a nonempty word");
  if (L < 0) throw ConfigError("L must be >= 0");
  if (!(U.grid() == grid)) throw std::invalid_argument("certify_trapping: grid mismatch");
  const std::vector<Word> words = enumerate_words(sys, L);
  check_budget(U.size(), words.size(), "certify_trapping");
  const std::vector<std::uint8_t> use(words.size(), 1);
  BoxSet image = image_cover(grid, sys, U, words, use, h);
  const BoxSet outside = fatten(image, 0.0).subtract(U);
  TrappingResult out{std::nullopt, std::nullopt, image};
  if (outside.empty()) {
    out.certificate = TrappingCertificate{U, h, L, std::move(image)};
  } else {
    out.violating_cell = outside.ids().front();
  }
  return out;
}

TrappingResult find_trapping_certificate(const Grid& grid, const GeneratorSystem& sys,
                                         const BoxSet& U, int L, int max_h_length) {
  if (max_h_length < 1) throw ConfigError("h search length must be >= 1");
  std::optional<TrappingResult> last;
  for (const Word& h : enumerate_nonempty_words(sys, max_h_length)) {
    TrappingResult r = certify_trapping(grid, sys, U, h, L);
    if (r.certificate) return r;
    last = std::move(r);
  }
  return std::move(*last);
}

// ---------------------------------------------------------------- attractor

AttractorRecord compute_attractor(const Grid& grid, const GeneratorSystem& sys,
                                  const TrappingCertificate& cert, std::uint32_t alpha0, int m_max) {
  check_generator(sys, alpha0);
  if (m_max < 1) throw ConfigError("m_max must be >= 1");
  if (cert.U.empty() || cert.h.is_identity()) throw ConfigError("invalid trapping certificate");

  const std::vector<Word> identity{Word({}, sys.size())};
  const BoxSet s0 = image_cover(grid, sys, cert.U, identity, {1}, cert.h);

  const std::vector<Word> words = enumerate_words(sys, cert.L);
  std::vector<std::uint8_t> use(words.size(), 0);
  for (std::size_t t = 0; t < words.size(); ++t) use[t] = words[t].count(alpha0) > 0;

  AttractorRecord rec{BoxSet(grid), BoxSet(grid), cert, alpha0, BoxSet(grid), false, 0};
  BoxSet current = s0;
  std::optional<BoxSet> inter;
  for (int m = 1; m <= m_max; ++m) {
    check_budget(current.size(), words.size(), "compute_attractor");
    BoxSet next = image_cover(grid, sys, current, words, use, Word({}, sys.size()));
    inter = inter ? inter->intersect(next) : next;
    rec.m_used = m;
    if (next == current) {
      rec.stabilized = true;
      break;
    }
    current = std::move(next);
  }
  rec.core = std::move(*inter);
  if (rec.core.empty()) throw InvariantError("attractor core is empty for a certified trapping region");
  rec.A = fatten(rec.core, 0.0);
  return rec;
}

// -------------------------------------------------------------------- omega

BoxSet omega_limit_cells(const Grid& grid, const GeneratorSystem& sys, const BoxSet& start,
                         std::uint32_t alpha0, int depth_m, int L) {
  check_generator(sys, alpha0);
  if (start.empty()) throw ConfigError("omega_limit_cells: start set is empty");
  if (depth_m < 1) throw ConfigError("omega depth must be >= 1");
  if (L < 0) throw ConfigError("L must be >= 0");
  const auto M = static_cast<std::uint32_t>(depth_m);
  const std::uint32_t K = M * static_cast<std::uint32_t>(L + 1);

  // Lazily evaluated cell images for the cells the search touches.
  std::unordered_map<CellId, std::vector<std::vector<CellId>>> images;
  auto image_of = [&](CellId id) -> const std::vector<std::vector<CellId>>& {
    auto it = images.find(id);
    if (it != images.end()) return it->second;
    std::vector<std::vector<CellId>> per_gen(sys.size());
    const IntervalBox2 box = grid.cell_box(id);
    for (std::size_t i = 0; i < sys.size(); ++i) {
      per_gen[i] = cells_of_range(grid, grid.cells_meeting(eval_box(sys.generators[i], box)));
    }
    return images.emplace(id, std::move(per_gen)).first->second;
  };

  // Shortest step count to each (cell, min(count, M)) state.
  const std::uint64_t stride = M + 1;
  std::unordered_map<std::uint64_t, std::uint32_t> dist;
  std::deque<std::uint64_t> queue;
  for (CellId id : start) {
    dist.emplace(id * stride, 0);
    queue.push_back(id * stride);
  }
  while (!queue.empty()) {
    const std::uint64_t state = queue.front();
    queue.pop_front();
    const std::uint32_t d = dist[state];
    if (d == K) continue;
    const CellId id = state / stride;
    const auto c = static_cast<std::uint32_t>(state % stride);
    const auto& per_gen = image_of(id);
    for (std::size_t i = 0; i < per_gen.size(); ++i) {
      const std::uint32_t c2 = std::min(M, c + (i == alpha0 ? 1U : 0U));
      for (CellId w : per_gen[i]) {
        const std::uint64_t next = w * stride + c2;
        if (dist.emplace(next, d + 1).second) queue.push_back(next);
      }
    }
  }

  // Best step count per (cell, threshold m): min over counts >= m.
  std::unordered_map<CellId, std::vector<std::uint32_t>> best;
  for (const auto& [state, d] : dist) {
    auto& v = best.try_emplace(state / stride, M + 1, kFar).first->second;
    const auto c = static_cast<std::size_t>(state % stride);
    v[c] = std::min(v[c], d);
  }
  std::optional<BoxSet> omega;
  for (std::uint32_t m = 1; m <= M; ++m) {
    std::vector<CellId> reach;
    for (auto& [id, v] : best) {
      std::uint32_t shortest = kFar;
      for (std::uint32_t c = m; c <= M; ++c) shortest = std::min(shortest, v[c]);
      if (shortest <= m * static_cast<std::uint32_t>(L + 1)) reach.push_back(id);
    }
    std::sort(reach.begin(), reach.end());
    BoxSet term = fatten(BoxSet::from_sorted(grid, std::move(reach)), 0.0);
    omega = omega ? omega->intersect(term) : std::move(term);
    if (omega->empty()) break;
  }
  return std::move(*omega);
}

// -------------------------------------------------------------------- basin

struct BasinSolver::Impl {
  Impl(const Grid& g, const GeneratorSystem& s) : grid(g), sys(s), graph(g, s) {
    graph.reverse(roff, rsrc);
  }
  Grid grid;
  GeneratorSystem sys;
  ImageGraph graph;
  std::vector<std::uint64_t> roff;
  std::vector<std::uint32_t> rsrc;
};

BasinSolver::BasinSolver(const Grid& grid, const GeneratorSystem& sys)
    : impl_(std::make_unique<Impl>(grid, sys)) {}
BasinSolver::BasinSolver(BasinSolver&&) noexcept = default;
BasinSolver::~BasinSolver() = default;

BoxSet BasinSolver::basin(const BoxSet& A, std::uint32_t alpha0, int depth_m, int L) const {
  const Impl& im = *impl_;
  check_generator(im.sys, alpha0);
  if (A.empty()) throw ConfigError("basin: attractor is empty");
  if (!(A.grid() == im.grid)) throw std::invalid_argument("basin: grid mismatch");
  if (depth_m < 1) throw ConfigError("omega depth must be >= 1");
  if (L < 0) throw ConfigError("L must be >= 0");
  const auto M = static_cast<std::uint32_t>(depth_m);
  const std::uint32_t K = M * static_cast<std::uint32_t>(L + 1);
  const std::size_t k = im.sys.size();
  const ImageGraph& graph = im.graph;

  // Backward search from (a, M), a in fatten0(A), over (cell, count) states.
  const std::size_t stride = M + 1;
  std::vector<std::uint32_t> dist(graph.size() * stride, kFar);
  std::deque<std::uint64_t> queue;
  for (CellId id : fatten(A, 0.0)) {
    const std::uint64_t s = std::uint64_t{graph.index(id)} * stride + M;
    dist[s] = 0;
    queue.push_back(s);
  }
  auto relax = [&](std::uint64_t s, std::uint32_t d) {
    if (dist[s] != kFar) return;
    dist[s] = d;
    queue.push_back(s);
  };
  while (!queue.empty()) {
    const std::uint64_t s = queue.front();
    queue.pop_front();
    const std::uint32_t d = dist[s];
    if (d == K) continue;
    const std::size_t w = s / stride;
    const auto c2 = static_cast<std::uint32_t>(s % stride);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = w * k + i;
      for (std::uint64_t e = im.roff[j]; e < im.roff[j + 1]; ++e) {
        const std::uint64_t v = im.rsrc[e];
        if (i != alpha0) {
          relax(v * stride + c2, d + 1);
        } else if (c2 > 0) {
          relax(v * stride + (c2 - 1), d + 1);
          if (c2 == M) relax(v * stride + M, d + 1);
        }
      }
    }
  }
  std::vector<CellId> ids;
  for (std::size_t v = 0; v < graph.size(); ++v) {
    if (dist[v * stride] <= K) ids.push_back(graph.cells().ids()[v]);
  }
  return BoxSet::from_sorted(im.grid, std::move(ids));
}

BoxSet basin(const Grid& grid, const GeneratorSystem& sys, const AttractorRecord& rec,
             std::uint32_t alpha0, int depth_m, int L) {
  return BasinSolver(grid, sys).basin(rec.A, alpha0, depth_m, L);
}

// ------------------------------------------------------------------ duality

DualityReport duality_report(const Grid& grid, const BoxSet& cr,
                             const std::vector<AttractorRecord>& attractors) {
  DualityReport rep{BoxSet(grid), BoxSet(grid), BoxSet(grid), 0, 0.0, attractors.size(), false};
  rep.complement_cr = cr.complement();
  for (const auto& a : attractors) {
    rep.basin_minus_attractor = rep.basin_minus_attractor.unite(a.basin.subtract(a.A));
  }
  rep.symmetric_difference = rep.complement_cr.symmetric_difference(rep.basin_minus_attractor);
  if (!rep.symmetric_difference.empty()) {
    const BoxSet layers = boundary_layer(cr).unite(boundary_layer(rep.basin_minus_attractor));
    if (layers.empty()) {
      rep.max_boundary_distance_cells = kFar;
    } else {
      const auto dist = chebyshev_distance(layers);
      for (CellId id : rep.symmetric_difference) {
        rep.max_boundary_distance_cells = std::max(rep.max_boundary_distance_cells, dist[id]);
      }
    }
    rep.max_boundary_distance = rep.max_boundary_distance_cells == kFar
                                    ? std::numeric_limits<double>::infinity()
                                    : rep.max_boundary_distance_cells *
                                          std::max(grid.cell_width(), grid.cell_height());
  }
  rep.pass = rep.max_boundary_distance_cells <= DualityReport::kToleranceCells;
  return rep;
}

// --------------------------------------------------------------- candidates

std::vector<BoxSet> sublevel_candidates(const Grid& grid, const std::vector<double>& radii) {
  std::vector<BoxSet> out;
  for (double r : radii) {
    if (!(r > 0.0)) throw ConfigError("sublevel radius must be positive");
    BoxSet s = disc_cells(grid, {0.0, 0.0}, r);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

BoxSet cell_image(const Grid& grid, const GeneratorSystem& sys, const BoxSet& s,
                  std::optional<std::uint32_t> generator) {
  if (generator) check_generator(sys, *generator);
  RectCover cover(grid);
  for (CellId id : s) {
    const IntervalBox2 box = grid.cell_box(id);
    for (std::uint32_t i = 0; i < sys.size(); ++i) {
      if (generator && *generator != i) continue;
      cover.add(eval_box(sys.generators[i], box));
    }
  }
  return cover.cells();
}

std::vector<BoxSet> component_closure_candidates(const Grid& grid, const GeneratorSystem& sys,
                                                 const ChainComponents& components, int rounds) {
  std::vector<BoxSet> out;
  auto close = [&](BoxSet s) {
    for (BoxSet frontier = s; !frontier.empty();) {
      const BoxSet img = cell_image(grid, sys, frontier);
      frontier = img.subtract(s);
      s = s.unite(frontier);
    }
    return s;
  };
  for (const BoxSet& cls : components.classes()) {
    BoxSet u = close(cls);
    for (int r = 0; r < rounds; ++r) u = close(fatten(u, 0.0));
    if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(std::move(u));
  }
  return out;
}

std::string attractor_to_json(const AttractorRecord& rec) {
  nlohmann::json j;
  j["certificate"] = {{"U", to_csv(rec.source.U)},
                      {"h", to_string(rec.source.h)},
                      {"L", rec.source.L},
                      {"image_set", to_csv(rec.source.image_set)}};
  j["alpha0"] = rec.alpha0;
  j["A"] = to_csv(rec.A);
  j["basin"] = to_csv(rec.basin);
  j["stabilized"] = rec.stabilized;
  j["m_used"] = rec.m_used;
  return j.dump(2);
}

}  // namespace chainrec
