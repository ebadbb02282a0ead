#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainrec/grid.h"
#include "chainrec/words.h"

namespace chainrec {

namespace detail {
class CellTree;
}

// Discrete (g, eps, L)-step graph on a set of grid cells. Vertex b has an
// edge to b' iff some h in G-hat with |h| <= L has a box image of b under
// h o g lying within distance < eps of b'. Edges are implicit: each vertex
// stores its image rectangles and successors are found by region queries.
class StepGraph {
 public:
  StepGraph(StepGraph&&) noexcept;
  StepGraph& operator=(StepGraph&&) noexcept;
  ~StepGraph();

  const BoxSet& vertices() const { return vertices_; }
  const Grid& grid() const { return vertices_.grid(); }
  const Word& g() const { return g_; }
  double eps() const { return eps_; }
  int max_h_length() const { return max_h_length_; }
  std::size_t vertex_count() const { return vertices_.size(); }

  // Index of a cell in vertices(), if present.
  std::optional<std::size_t> index_of(CellId id) const;

  // Image rectangles of vertex v, redundant (contained) ones removed.
  std::span<const IntervalBox2> images(std::size_t v) const;

  bool has_edge(CellId from, CellId to) const;
  std::vector<CellId> successors(CellId from) const;
  std::uint64_t edge_count() const;

  const detail::CellTree& tree() const { return *tree_; }

 private:
  friend StepGraph build_step_graph(const BoxSet&, const GeneratorSystem&, const Word&, double, int);
  explicit StepGraph(BoxSet vertices);

  BoxSet vertices_;
  Word g_;
  double eps_ = 0.0;
  int max_h_length_ = 0;
  std::vector<std::uint32_t> offsets_;
  std::vector<IntervalBox2> rects_;
  std::unique_ptr<detail::CellTree> tree_;
};

// Throws BudgetError when cells x words exceeds 1e8 box evaluations.
StepGraph build_step_graph(const Grid& grid, const GeneratorSystem& sys, const Word& g, double eps,
                           int max_h_length);
// Step graph restricted to the cells of `domain`.
StepGraph build_step_graph(const BoxSet& domain, const GeneratorSystem& sys, const Word& g,
                           double eps, int max_h_length);

// True iff a path of length >= 1 leads from a to b.
bool chain_reachable(const StepGraph& graph, CellId a, CellId b);

// Cells reachable from `sources` by paths of length >= 1.
BoxSet reachable_from(const StepGraph& graph, const BoxSet& sources);

// Strongly connected components; labels are ordered by smallest member id.
struct SccResult {
  std::vector<std::uint32_t> label;      // per vertex
  std::vector<std::uint32_t> size;       // per label
  std::vector<std::uint8_t> recurrent;   // per label: size > 1 or self-loop
};
SccResult strongly_connected_components(const StepGraph& graph);

// Cells lying on a cycle of the step graph.
BoxSet chain_recurrent_cells(const StepGraph& graph);

// Partition of a set of recurrent cells into chain components.
struct ChainComponents {
  BoxSet cells;
  std::vector<std::uint32_t> labels;  // aligned with cells.ids(); 0 holds the smallest id
  std::size_t count = 0;

  std::vector<BoxSet> classes() const;
};

// Components of `cr` under one step graph. Throws InvariantError unless cr is
// contained in chain_recurrent_cells(graph).
ChainComponents chain_components(const StepGraph& graph, const BoxSet& cr);

// Parameters shared by the multi-(g, eps) analyses.
struct ChainSchedule {
  std::vector<Word> g_schedule;
  std::vector<double> eps_schedule;  // strictly decreasing
  int max_h_length = 0;

  void validate(const GeneratorSystem& sys) const;
};

struct ChainPairStats {
  Word g;
  double eps = 0.0;
  std::size_t vertices = 0;
  std::size_t recurrent = 0;
  std::size_t components = 0;
};

struct ChainAnalysis {
  BoxSet cr;
  ChainComponents components;
  std::vector<ChainPairStats> pairs;
};

// Intersection over every (g, eps) of the recurrent cells, with components
// given by the common refinement of the per-pair component partitions.
// Each descending eps step only examines cells recurrent at the previous step;
// shrinking eps removes edges, so this restriction loses nothing.
ChainAnalysis analyze_chain_recurrence(const Grid& grid, const GeneratorSystem& sys,
                                       const ChainSchedule& schedule);

BoxSet approx_CR(const Grid& grid, const GeneratorSystem& sys, const ChainSchedule& schedule);

// All cells lie in one recurrent component for every (g, eps).
bool is_chain_transitive(const Grid& grid, const GeneratorSystem& sys, const BoxSet& cells,
                         const ChainSchedule& schedule);

struct TransitivityResult {
  bool transitive = false;
  // First (u, v) pair, in id order, that no word covers.
  std::optional<std::pair<CellId, CellId>> counterexample;
  // For grids of at most kWitnessLimit cells: witness[u * n + v] is the index
  // into the enumerated word list of the shortest covering word, or -1.
  std::vector<std::int32_t> witness;
  static constexpr std::size_t kWitnessLimit = 1024;
};

// Cell-level test: for all cells u, v some word of length <= word_budget maps
// the box of u onto a rectangle meeting v. Limited to 2^14 cells.
TransitivityResult is_topologically_transitive(const Grid& grid, const GeneratorSystem& sys,
                                               int word_budget);

// Edge list "from_ix,from_iy,to_ix,to_iy".
std::string step_graph_to_csv(const StepGraph& graph);

// "ix,iy,component".
std::string components_to_csv(const ChainComponents& components);

}  // namespace chainrec
