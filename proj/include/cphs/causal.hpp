#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cphs::causal {

// Directed acyclic graph over named variables. Nodes and edges iterate in
// lexicographic order so every downstream artifact is deterministic.
class CausalGraph {
public:
    CausalGraph() = default;
    explicit CausalGraph(const std::vector<std::string>& nodes);

    void add_node(const std::string& name);
    void remove_node(const std::string& name);  // drops incident edges
    void add_edge(const std::string& parent, const std::string& child);  // rejects cycles
    void remove_edge(const std::string& parent, const std::string& child);

    bool has_node(const std::string& name) const;
    bool has_edge(const std::string& parent, const std::string& child) const;

    const std::set<std::string>& nodes() const { return nodes_; }
    const std::set<std::pair<std::string, std::string>>& edges() const { return edges_; }
    std::vector<std::string> parents(const std::string& node) const;
    std::vector<std::string> children(const std::string& node) const;
    // Proper descendants (excludes the node itself).
    std::set<std::string> descendants(const std::string& node) const;

    bool operator==(const CausalGraph& other) const = default;

private:
    void require_node(const std::string& name) const;
    bool reachable(const std::string& from, const std::string& to) const;

    std::set<std::string> nodes_;
    std::set<std::pair<std::string, std::string>> edges_;
};

// Edge-list text format: one `parent -> child` per line, bare names declare
// isolated nodes, `#` starts a comment.
void write_graph(std::ostream& os, const CausalGraph& graph);
CausalGraph read_graph(std::istream& is);

bool d_separated(const CausalGraph& graph, const std::string& x, const std::string& y,
                 const std::set<std::string>& z);

struct Independence {
    std::string x, y;            // x < y lexicographically
    std::vector<std::string> z;  // sorted

    bool operator==(const Independence& other) const = default;
};

// Every d-separation with |Z| <= max_conditioning, ordered by (x, y, |Z|, Z).
std::vector<Independence> implied_independencies(const CausalGraph& graph,
                                                 std::size_t max_conditioning = 2);

// ---------------------------------------------------------------------------
// Data

struct DataTable {
    std::vector<std::string> names;
    std::vector<bool> discrete;                  // parallel to names
    std::vector<std::vector<double>> columns;    // parallel to names

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t column_index(const std::string& name) const;  // throws on unknown
    void validate() const;
};

struct TestOptions {
    int quantile_bins = 3;            // discretization for mixed-type tests
    std::size_t max_conditioning = 2;
};

struct IndependenceTest {
    Independence triple;
    bool implied = true;
    std::string method;  // "g-test" or "fisher-z"
    double p_value = 1.0;
    bool rejected = false;
    int skipped_strata = 0;
};

struct IndependenceTestReport {
    double alpha_sig = 0.01;
    std::vector<IndependenceTest> tests;
};

IndependenceTestReport test_implications(const CausalGraph& graph, const DataTable& data,
                                         double alpha_sig, const TestOptions& options = {});

void write_report_csv(std::ostream& os, const IndependenceTestReport& report);

// ---------------------------------------------------------------------------
// Effect estimation

struct AdjustmentResult {
    bool feasible = false;
    std::set<std::string> set;
};

// Minimal-cardinality backdoor set on the surgered graph; lexicographic
// tie-break among sets of equal size.
AdjustmentResult adjustment_set(const CausalGraph& graph, const std::string& treatment,
                                const std::string& outcome);

struct IpwDiagnostics {
    std::vector<double> coefficients;  // intercept first, standardized covariates
    std::size_t treated = 0;
    std::size_t control = 0;
    int clipped_propensities = 0;
    double min_weight = 0.0;
    double max_weight = 0.0;
    double mean_weight = 0.0;
    double naive_difference = 0.0;  // unadjusted arm-mean difference
};

std::pair<double, IpwDiagnostics> estimate_ate_ipw(const DataTable& data,
                                                   const std::string& treatment,
                                                   const std::string& outcome,
                                                   const std::vector<std::string>& covariates,
                                                   bool stabilized);

// ---------------------------------------------------------------------------
// Feedback

struct FeedbackPlan {
    std::vector<std::string> add_variables;
    std::vector<std::string> remove_variables;
    std::vector<std::pair<std::string, std::string>> added_edges;
    std::vector<std::pair<std::string, std::string>> removed_edges;
    std::map<std::string, double> effects;
    double negligibility = 0.02;
};

// Greedy repair: one edge per rejected implication (lexicographic tie-break,
// acyclicity preserved), then removal proposals for variables with
// negligible effect and no surviving implication; at most `budget` edits.
std::pair<CausalGraph, FeedbackPlan> refine_graph(const CausalGraph& pilot,
                                                  const IndependenceTestReport& report,
                                                  const std::map<std::string, double>& effects,
                                                  std::size_t budget,
                                                  double negligibility = 0.02);

// Structural Hamming distance plus the node-set symmetric difference.
std::size_t graph_distance(const CausalGraph& g1, const CausalGraph& g2);

}  // namespace cphs::causal
