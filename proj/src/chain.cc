#include "chainrec/chain.h"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "cell_tree.h"
#include "chainrec/errors.h"
#include "chainrec/parallel.h"

namespace chainrec {

namespace {

using detail::CellTree;
using detail::Region;
using detail::TraversalState;

constexpr double kMaxBoxEvaluations = 1e8;
constexpr std::uint32_t kUnset = TraversalState::kNone;
// Above this many images per vertex the quadratic containment prune is skipped.
constexpr std::size_t kPruneLimit = 64;

bool contains_rect(const IntervalBox2& outer, const IntervalBox2& inner) {
  return outer.re.lo <= inner.re.lo && inner.re.hi <= outer.re.hi && outer.im.lo <= inner.im.lo &&
         inner.im.hi <= outer.im.hi;
}

// Drops rectangles that cannot reach any cell or are contained in another kept
// rectangle. Among equal rectangles the first survives.
void prune_images(std::vector<IntervalBox2>& rects, const IntervalBox2& bounds, double eps2) {
  std::erase_if(rects, [&](const IntervalBox2& r) { return !(r.distance_squared(bounds) < eps2); });
  if (rects.size() > kPruneLimit) {
    std::vector<IntervalBox2> unique;
    for (const auto& r : rects) {
      if (std::find(unique.begin(), unique.end(), r) == unique.end()) unique.push_back(r);
    }
    rects.swap(unique);
    return;
  }
  std::vector<IntervalBox2> kept;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    bool redundant = false;
    for (std::size_t j = 0; j < rects.size() && !redundant; ++j) {
      if (i == j || !contains_rect(rects[j], rects[i])) continue;
      // Strict containment, or equal with the earlier copy kept.
      redundant = !(rects[i] == rects[j]) || j < i;
    }
    if (!redundant) kept.push_back(rects[i]);
  }
  rects.swap(kept);
}

void check_word(const GeneratorSystem& sys, const Word& g) {
  if (g.is_identity()) throw ConfigError("test map g must be a nonempty word");
  for (auto i : g.indices()) {
    if (i >= sys.size()) throw ConfigError("word " + to_string(g) + " uses an unknown generator");
  }
}

std::string cell_text(const Grid& grid, CellId id) {
  const Cell c = grid.cell(id);
  return std::to_string(c.ix) + "," + std::to_string(c.iy);
}

// Implicit-adjacency iterative Tarjan. Regions of a vertex are scanned in
// order; each region is drained of unvisited vertices (tree edges) before its
// on-stack minimum is folded into low.
SccResult tarjan(const StepGraph& graph) {
  const std::size_t n = graph.vertex_count();
  const double eps2 = graph.eps() * graph.eps();
  TraversalState state(graph.tree());
  std::vector<std::uint32_t> index(n, kUnset);
  std::vector<std::uint32_t> low(n, kUnset);
  std::vector<std::uint32_t> comp(n, kUnset);
  std::vector<std::uint32_t> stack;
  struct Frame {
    std::uint32_t v;
    std::uint32_t region;
  };
  std::vector<Frame> frames;
  std::uint32_t counter = 0;
  std::uint32_t comp_count = 0;

  auto visit = [&](std::size_t v) {
    state.mark_visited(v);
    index[v] = low[v] = counter++;
    stack.push_back(static_cast<std::uint32_t>(v));
    state.set_key(v, index[v]);
    frames.push_back({static_cast<std::uint32_t>(v), 0});
  };

  for (std::size_t root = 0; root < n; ++root) {
    if (state.visited(root)) continue;
    visit(root);
    while (!frames.empty()) {
      const std::uint32_t v = frames.back().v;
      const auto images = graph.images(v);
      if (frames.back().region < images.size()) {
        const Region r{images[frames.back().region], eps2};
        const std::int64_t w = state.find_unvisited(r);
        if (w >= 0) {
          visit(static_cast<std::size_t>(w));
          continue;
        }
        low[v] = state.min_key(r, low[v]);
        ++frames.back().region;
        continue;
      }
      if (low[v] == index[v]) {
        for (;;) {
          const std::uint32_t x = stack.back();
          stack.pop_back();
          comp[x] = comp_count;
          state.clear_key(x);
          if (x == v) break;
        }
        ++comp_count;
      }
      frames.pop_back();
      if (!frames.empty()) {
        const std::uint32_t p = frames.back().v;
        low[p] = std::min(low[p], low[v]);
      }
    }
  }

  // Relabel by smallest member (vertices are in id order).
  SccResult out;
  out.label.assign(n, 0);
  std::vector<std::uint32_t> rename(comp_count, kUnset);
  std::uint32_t next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (rename[comp[v]] == kUnset) rename[comp[v]] = next++;
    out.label[v] = rename[comp[v]];
  }
  out.size.assign(next, 0);
  out.recurrent.assign(next, 0);
  for (std::size_t v = 0; v < n; ++v) ++out.size[out.label[v]];
  for (std::size_t v = 0; v < n; ++v) {
    const std::uint32_t c = out.label[v];
    if (out.size[c] > 1) {
      out.recurrent[c] = 1;
      continue;
    }
    const IntervalBox2 box = graph.grid().cell_box(graph.vertices().ids()[v]);
    for (const auto& r : graph.images(v)) {
      if (box.distance_squared(r) < eps2) {
        out.recurrent[c] = 1;
        break;
      }
    }
  }
  return out;
}

BoxSet recurrent_cells(const StepGraph& graph, const SccResult& scc) {
  std::vector<CellId> ids;
  const auto& verts = graph.vertices().ids();
  for (std::size_t v = 0; v < verts.size(); ++v) {
    if (scc.recurrent[scc.label[v]]) ids.push_back(verts[v]);
  }
  return BoxSet::from_sorted(graph.grid(), std::move(ids));
}

// BFS over paths of length >= 1. Stops early once `stop_at` is reached.
std::vector<std::uint8_t> reach(const StepGraph& graph, const std::vector<std::size_t>& sources,
                                std::optional<std::size_t> stop_at) {
  TraversalState state(graph.tree());
  const double eps2 = graph.eps() * graph.eps();
  std::deque<std::size_t> queue(sources.begin(), sources.end());
  std::vector<std::uint8_t> seen(graph.vertex_count(), 0);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& rect : graph.images(u)) {
      const Region r{rect, eps2};
      for (std::int64_t w = state.find_unvisited(r); w >= 0; w = state.find_unvisited(r)) {
        const auto wv = static_cast<std::size_t>(w);
        state.mark_visited(wv);
        seen[wv] = 1;
        if (stop_at && *stop_at == wv) return seen;
        queue.push_back(wv);
      }
    }
  }
  return seen;
}

std::size_t require_vertex(const StepGraph& graph, CellId id) {
  const auto v = graph.index_of(id);
  if (!v) throw std::invalid_argument("cell " + std::to_string(id) + " is not a step-graph vertex");
  return *v;
}

// Renumbers keys to 0.. in order of first appearance.
template <class Key>
ChainComponents label_by_first_appearance(const BoxSet& cells, const std::vector<Key>& keys) {
  ChainComponents out{cells, {}, 0};
  std::map<Key, std::uint32_t> ids;
  out.labels.reserve(keys.size());
  for (const auto& k : keys) {
    const auto [it, inserted] = ids.emplace(k, static_cast<std::uint32_t>(ids.size()));
    out.labels.push_back(it->second);
  }
  out.count = ids.size();
  return out;
}

// Runs the descending-eps restriction for one g, calling visit(graph, scc)
// for every eps; visit returns false to stop early.
template <class Visit>
BoxSet descend_eps(const Grid& grid, const GeneratorSystem& sys, const Word& g,
                   const ChainSchedule& schedule, Visit&& visit) {
  BoxSet domain = BoxSet::all(grid);
  for (double eps : schedule.eps_schedule) {
    const StepGraph graph = build_step_graph(domain, sys, g, eps, schedule.max_h_length);
    const SccResult scc = tarjan(graph);
    domain = recurrent_cells(graph, scc);
    if (!visit(graph, scc, domain)) break;
  }
  return domain;
}

}  // namespace

// ---------------------------------------------------------------- StepGraph

StepGraph::StepGraph(BoxSet vertices) : vertices_(std::move(vertices)) {}
StepGraph::StepGraph(StepGraph&&) noexcept = default;
StepGraph& StepGraph::operator=(StepGraph&&) noexcept = default;
StepGraph::~StepGraph() = default;

std::optional<std::size_t> StepGraph::index_of(CellId id) const {
  const auto& ids = vertices_.ids();
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

std::span<const IntervalBox2> StepGraph::images(std::size_t v) const {
  return {rects_.data() + offsets_[v], rects_.data() + offsets_[v + 1]};
}

std::vector<CellId> StepGraph::successors(CellId from) const {
  const std::size_t v = require_vertex(*this, from);
  std::vector<CellId> out;
  const double eps2 = eps_ * eps_;
  for (const auto& rect : images(v)) {
    tree_->for_each_in(Region{rect, eps2}, [&](std::size_t w) { out.push_back(vertices_.ids()[w]); });
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool StepGraph::has_edge(CellId from, CellId to) const {
  const std::size_t v = require_vertex(*this, from);
  if (!index_of(to)) return false;
  const IntervalBox2 box = grid().cell_box(to);
  const double eps2 = eps_ * eps_;
  return std::any_of(images(v).begin(), images(v).end(),
                     [&](const IntervalBox2& r) { return box.distance_squared(r) < eps2; });
}

std::uint64_t StepGraph::edge_count() const {
  std::uint64_t total = 0;
  for (CellId id : vertices_) total += successors(id).size();
  return total;
}

StepGraph build_step_graph(const Grid& grid, const GeneratorSystem& sys, const Word& g, double eps,
                           int max_h_length) {
  return build_step_graph(BoxSet::all(grid), sys, g, eps, max_h_length);
}

StepGraph build_step_graph(const BoxSet& domain, const GeneratorSystem& sys, const Word& g,
                           double eps, int max_h_length) {
  check_word(sys, g);
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (max_h_length < 0) throw ConfigError("L must be >= 0");
  const std::vector<Word> words = enumerate_words(sys, max_h_length);
  const auto n = domain.size();
  if (static_cast<double>(n) * static_cast<double>(words.size()) > kMaxBoxEvaluations) {
    throw BudgetError("step graph needs " + std::to_string(n) + " cells x " +
                      std::to_string(words.size()) + " words of box evaluations, over the 1e8 cap");
  }
  const std::vector<std::int64_t> suffix = suffix_indices(words);
  const Grid& grid = domain.grid();
  const double eps2 = eps * eps;

  std::vector<std::vector<IntervalBox2>> per_vertex(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<IntervalBox2> images(words.size());
    for (std::size_t v = begin; v < end; ++v) {
      images[0] = word_box_image(sys, g, grid.cell_box(domain.ids()[v]));
      for (std::size_t t = 1; t < words.size(); ++t) {
        const auto outer = words[t].indices().front();
        images[t] = eval_box(sys.generators[outer], images[static_cast<std::size_t>(suffix[t])]);
      }
      std::vector<IntervalBox2> kept(images);
      prune_images(kept, grid.bounds(), eps2);
      per_vertex[v] = std::move(kept);
    }
  });

  StepGraph graph(domain);
  graph.g_ = g;
  graph.eps_ = eps;
  graph.max_h_length_ = max_h_length;
  graph.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    graph.offsets_[v + 1] = graph.offsets_[v] + static_cast<std::uint32_t>(per_vertex[v].size());
  }
  graph.rects_.reserve(graph.offsets_[n]);
  for (auto& imgs : per_vertex) {
    graph.rects_.insert(graph.rects_.end(), imgs.begin(), imgs.end());
    std::vector<IntervalBox2>().swap(imgs);
  }
  graph.tree_ = std::make_unique<detail::CellTree>(grid, graph.vertices_.ids());
  return graph;
}

// ------------------------------------------------------------- algorithms

bool chain_reachable(const StepGraph& graph, CellId a, CellId b) {
  const std::size_t va = require_vertex(graph, a);
  const auto vb = graph.index_of(b);
  if (!vb) return false;
  return reach(graph, {va}, *vb)[*vb] != 0;
}

BoxSet reachable_from(const StepGraph& graph, const BoxSet& sources) {
  std::vector<std::size_t> src;
  for (CellId id : sources) src.push_back(require_vertex(graph, id));
  const auto seen = reach(graph, src, std::nullopt);
  std::vector<CellId> ids;
  for (std::size_t v = 0; v < seen.size(); ++v) {
    if (seen[v]) ids.push_back(graph.vertices().ids()[v]);
  }
  return BoxSet::from_sorted(graph.grid(), std::move(ids));
}

SccResult strongly_connected_components(const StepGraph& graph) { return tarjan(graph); }

BoxSet chain_recurrent_cells(const StepGraph& graph) { return recurrent_cells(graph, tarjan(graph)); }

std::vector<BoxSet> ChainComponents::classes() const {
  std::vector<std::vector<CellId>> groups(count);
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(cells.ids()[i]);
  std::vector<BoxSet> out;
  out.reserve(count);
  for (auto& g : groups) out.push_back(BoxSet::from_sorted(cells.grid(), std::move(g)));
  return out;
}

ChainComponents chain_components(const StepGraph& graph, const BoxSet& cr) {
  const SccResult scc = tarjan(graph);
  std::vector<std::uint32_t> keys;
  keys.reserve(cr.size());
  for (CellId id : cr) {
    const auto v = graph.index_of(id);
    if (!v || !scc.recurrent[scc.label[*v]]) {
      throw InvariantError("chain_components: cell " + cell_text(cr.grid(), id) +
                           " is not chain recurrent");
    }
    keys.push_back(scc.label[*v]);
  }
  return label_by_first_appearance(cr, keys);
}

void ChainSchedule::validate(const GeneratorSystem& sys) const {
  if (g_schedule.empty()) throw ConfigError("g_schedule is empty");
  if (eps_schedule.empty()) throw ConfigError("eps_schedule is empty");
  for (const auto& g : g_schedule) check_word(sys, g);
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] > 0.0)) throw ConfigError("eps_schedule entries must be positive");
    if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1])) {
      throw ConfigError("eps_schedule must be strictly decreasing");
    }
  }
  if (max_h_length < 0) throw ConfigError("L must be >= 0");
}

ChainAnalysis analyze_chain_recurrence(const Grid& grid, const GeneratorSystem& sys,
                                       const ChainSchedule& schedule) {
  schedule.validate(sys);
  struct PairLabels {
    BoxSet cells;
    std::vector<std::uint32_t> labels;
  };
  std::vector<PairLabels> per_pair;
  ChainAnalysis out{BoxSet(grid), {BoxSet(grid), {}, 0}, {}};
  std::optional<BoxSet> cr;
  for (const Word& g : schedule.g_schedule) {
    BoxSet cr_g = descend_eps(grid, sys, g, schedule,
                              [&](const StepGraph& graph, const SccResult& scc, const BoxSet& rec) {
                                PairLabels pl{rec, {}};
                                pl.labels.reserve(rec.size());
                                std::size_t components = 0;
                                for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
                                  if (scc.recurrent[scc.label[v]]) pl.labels.push_back(scc.label[v]);
                                }
                                for (auto r : scc.recurrent) components += r;
                                out.pairs.push_back(
                                    {g, graph.eps(), graph.vertex_count(), rec.size(), components});
                                per_pair.push_back(std::move(pl));
                                return true;
                              });
    cr = cr ? cr->intersect(cr_g) : std::move(cr_g);
  }
  out.cr = std::move(*cr);

  std::vector<std::vector<std::uint32_t>> keys(out.cr.size());
  for (const auto& pl : per_pair) {
    const auto& ids = pl.cells.ids();
    for (std::size_t i = 0; i < out.cr.size(); ++i) {
      const auto it = std::lower_bound(ids.begin(), ids.end(), out.cr.ids()[i]);
      keys[i].push_back(pl.labels[static_cast<std::size_t>(it - ids.begin())]);
    }
  }
  out.components = label_by_first_appearance(out.cr, keys);
  return out;
}

BoxSet approx_CR(const Grid& grid, const GeneratorSystem& sys, const ChainSchedule& schedule) {
  return analyze_chain_recurrence(grid, sys, schedule).cr;
}

bool is_chain_transitive(const Grid& grid, const GeneratorSystem& sys, const BoxSet& cells,
                         const ChainSchedule& schedule) {
  schedule.validate(sys);
  if (!(cells.grid() == grid)) throw std::invalid_argument("is_chain_transitive: grid mismatch");
  if (cells.empty()) return true;
  for (const Word& g : schedule.g_schedule) {
    bool ok = true;
    descend_eps(grid, sys, g, schedule,
                [&](const StepGraph& graph, const SccResult& scc, const BoxSet&) {
                  std::optional<std::uint32_t> label;
                  for (CellId id : cells) {
                    const auto v = graph.index_of(id);
                    if (!v || !scc.recurrent[scc.label[*v]] || (label && *label != scc.label[*v])) {
                      ok = false;
                      return false;
                    }
                    label = scc.label[*v];
                  }
                  return true;
                });
    if (!ok) return false;
  }
  return true;
}

TransitivityResult is_topologically_transitive(const Grid& grid, const GeneratorSystem& sys,
                                               int word_budget) {
  if (word_budget < 0) throw ConfigError("word_budget must be >= 0");
  const BoxSet cells = BoxSet::all(grid);
  const std::size_t n = cells.size();
  if (n > (std::size_t{1} << 14)) {
    throw BudgetError("topological transitivity is limited to 2^14 cells, grid has " +
                      std::to_string(n));
  }
  const std::vector<Word> words = enumerate_words(sys, word_budget);
  if (static_cast<double>(n) * static_cast<double>(words.size()) > kMaxBoxEvaluations) {
    throw BudgetError("topological transitivity exceeds the 1e8 box-evaluation cap");
  }
  const std::vector<std::int64_t> suffix = suffix_indices(words);
  TransitivityResult out;
  out.transitive = true;
  const bool keep_witness = n <= TransitivityResult::kWitnessLimit;
  if (keep_witness) out.witness.assign(n * n, -1);

  std::vector<IntervalBox2> images(words.size());
  RectCover cover(grid);
  for (std::size_t u = 0; u < n; ++u) {
    images[0] = grid.cell_box(cells.ids()[u]);
    for (std::size_t t = 1; t < words.size(); ++t) {
      images[t] = eval_box(sys.generators[words[t].indices().front()],
                           images[static_cast<std::size_t>(suffix[t])]);
    }
    if (keep_witness) {
      std::int32_t* row = out.witness.data() + u * n;
      for (std::size_t t = 0; t < words.size(); ++t) {
        const auto range = grid.cells_meeting(images[t]);
        if (!range) continue;
        for (std::uint32_t iy = range->iy0; iy <= range->iy1; ++iy) {
          for (std::uint32_t ix = range->ix0; ix <= range->ix1; ++ix) {
            const CellId id = grid.id(Cell{ix, iy});
            const auto it = std::lower_bound(cells.ids().begin(), cells.ids().end(), id);
            if (it == cells.ids().end() || *it != id) continue;
            auto& slot = row[it - cells.ids().begin()];
            if (slot < 0) slot = static_cast<std::int32_t>(t);
          }
        }
      }
      for (std::size_t v = 0; v < n && out.transitive; ++v) {
        if (row[v] < 0) {
          out.transitive = false;
          out.counterexample = {cells.ids()[u], cells.ids()[v]};
        }
      }
    } else {
      cover.reset();
      for (const auto& r : images) cover.add(r);
      const auto& mask = cover.mask();
      for (std::size_t v = 0; v < n; ++v) {
        if (!mask[cells.ids()[v]]) {
          out.transitive = false;
          out.counterexample = {cells.ids()[u], cells.ids()[v]};
          break;
        }
      }
    }
    if (!out.transitive) break;
  }
  return out;
}

std::string step_graph_to_csv(const StepGraph& graph) {
  std::ostringstream os;
  os << "from_ix,from_iy,to_ix,to_iy\n";
  for (CellId id : graph.vertices()) {
    for (CellId to : graph.successors(id)) {
      os << cell_text(graph.grid(), id) << ',' << cell_text(graph.grid(), to) << '\n';
    }
  }
  return os.str();
}

std::string components_to_csv(const ChainComponents& components) {
  std::ostringstream os;
  os << "ix,iy,component\n";
  for (std::size_t i = 0; i < components.labels.size(); ++i) {
    os << cell_text(components.cells.grid(), components.cells.ids()[i]) << ','
       << components.labels[i] << '\n';
  }
  return os.str();
}

}  // namespace chainrec
