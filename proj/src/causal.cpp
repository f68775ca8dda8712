#include "cphs/causal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cphs/stats.hpp"
#include "cphs/text.hpp"

namespace cphs::causal {

CausalGraph::CausalGraph(const std::vector<std::string>& nodes) {
    for (const std::string& n : nodes) add_node(n);
}

void CausalGraph::add_node(const std::string& name) {
    if (name.empty()) throw std::invalid_argument("causal graph: empty node name");
    if (!nodes_.insert(name).second)
        throw std::invalid_argument("causal graph: duplicate node '" + name + "'");
}

void CausalGraph::remove_node(const std::string& name) {
    require_node(name);
    nodes_.erase(name);
    for (auto it = edges_.begin(); it != edges_.end();) {
        if (it->first == name || it->second == name)
            it = edges_.erase(it);
        else
            ++it;
    }
}

void CausalGraph::require_node(const std::string& name) const {
    if (!nodes_.count(name))
        throw std::invalid_argument("causal graph: unknown node '" + name + "'");
}

bool CausalGraph::reachable(const std::string& from, const std::string& to) const {
    std::deque<std::string> queue{from};
    std::set<std::string> seen{from};
    while (!queue.empty()) {
        std::string v = queue.front();
        queue.pop_front();
        if (v == to) return true;
        for (const auto& e : edges_)
            if (e.first == v && seen.insert(e.second).second) queue.push_back(e.second);
    }
    return false;
}

void CausalGraph::add_edge(const std::string& parent, const std::string& child) {
    require_node(parent);
    require_node(child);
    if (parent == child) throw std::invalid_argument("causal graph: self-loop on '" + parent + "'");
    if (edges_.count({parent, child})) return;
    if (reachable(child, parent))
        throw std::invalid_argument("causal graph: edge " + parent + " -> " + child +
                                    " would create a cycle");
    edges_.insert({parent, child});
}

void CausalGraph::remove_edge(const std::string& parent, const std::string& child) {
    if (!edges_.erase({parent, child}))
        throw std::invalid_argument("causal graph: no edge " + parent + " -> " + child);
}

bool CausalGraph::has_node(const std::string& name) const { return nodes_.count(name) > 0; }

bool CausalGraph::has_edge(const std::string& parent, const std::string& child) const {
    return edges_.count({parent, child}) > 0;
}

std::vector<std::string> CausalGraph::parents(const std::string& node) const {
    require_node(node);
    std::vector<std::string> out;
    for (const auto& e : edges_)
        if (e.second == node) out.push_back(e.first);
    return out;
}

std::vector<std::string> CausalGraph::children(const std::string& node) const {
    require_node(node);
    std::vector<std::string> out;
    for (const auto& e : edges_)
        if (e.first == node) out.push_back(e.second);
    return out;
}

std::set<std::string> CausalGraph::descendants(const std::string& node) const {
    require_node(node);
    std::set<std::string> out;
    std::deque<std::string> queue{node};
    while (!queue.empty()) {
        std::string v = queue.front();
        queue.pop_front();
        for (const auto& e : edges_)
            if (e.first == v && out.insert(e.second).second) queue.push_back(e.second);
    }
    out.erase(node);
    return out;
}

void write_graph(std::ostream& os, const CausalGraph& graph) {
    for (const std::string& n : graph.nodes()) os << n << "\n";
    for (const auto& e : graph.edges()) os << e.first << " -> " << e.second << "\n";
}

namespace {

std::string trim_copy(std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

}  // namespace

CausalGraph read_graph(std::istream& is) {
    CausalGraph g;
    std::string line;
    while (std::getline(is, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim_copy(line);
        if (line.empty()) continue;
        std::size_t arrow = line.find("->");
        if (arrow == std::string::npos) {
            if (!g.has_node(line)) g.add_node(line);
            continue;
        }
        std::string parent = trim_copy(line.substr(0, arrow));
        std::string child = trim_copy(line.substr(arrow + 2));
        if (parent.empty() || child.empty())
            throw std::runtime_error("graph file: malformed edge line '" + line + "'");
        if (!g.has_node(parent)) g.add_node(parent);
        if (!g.has_node(child)) g.add_node(child);
        g.add_edge(parent, child);
    }
    return g;
}

// ---------------------------------------------------------------------------
// d-separation (reachability over trail states)

bool d_separated(const CausalGraph& graph, const std::string& x, const std::string& y,
                 const std::set<std::string>& z) {
    if (!graph.has_node(x)) throw std::invalid_argument("d_separated: unknown node '" + x + "'");
    if (!graph.has_node(y)) throw std::invalid_argument("d_separated: unknown node '" + y + "'");
    for (const std::string& n : z)
        if (!graph.has_node(n))
            throw std::invalid_argument("d_separated: unknown node '" + n + "'");
    if (x == y) throw std::invalid_argument("d_separated: x and y must differ");
    if (z.count(x) || z.count(y))
        throw std::invalid_argument("d_separated: x and y must not be conditioned on");

    // Ancestors of Z (including Z itself).
    std::set<std::string> anc = z;
    std::deque<std::string> frontier(z.begin(), z.end());
    while (!frontier.empty()) {
        std::string v = frontier.front();
        frontier.pop_front();
        for (const std::string& p : graph.parents(v))
            if (anc.insert(p).second) frontier.push_back(p);
    }

    // State: (node, entered-from-child?). Standard reachable-trail walk.
    enum Dir { Up, Down };  // Up: arrived moving child-to-parent or at the start
    std::set<std::pair<std::string, int>> visited;
    std::deque<std::pair<std::string, int>> queue{{x, Up}};
    while (!queue.empty()) {
        auto [v, dir] = queue.front();
        queue.pop_front();
        if (!visited.insert({v, dir}).second) continue;
        if (v == y) return false;
        if (dir == Up) {
            if (!z.count(v)) {
                for (const std::string& p : graph.parents(v)) queue.push_back({p, Up});
                for (const std::string& c : graph.children(v)) queue.push_back({c, Down});
            }
        } else {
            if (!z.count(v))
                for (const std::string& c : graph.children(v)) queue.push_back({c, Down});
            if (anc.count(v))
                for (const std::string& p : graph.parents(v)) queue.push_back({p, Up});
        }
    }
    return true;
}

std::vector<Independence> implied_independencies(const CausalGraph& graph,
                                                 std::size_t max_conditioning) {
    std::vector<std::string> nodes(graph.nodes().begin(), graph.nodes().end());
    std::vector<Independence> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            std::vector<std::string> rest;
            for (std::size_t k = 0; k < nodes.size(); ++k)
                if (k != i && k != j) rest.push_back(nodes[k]);
            std::size_t cap = std::min(max_conditioning, rest.size());
            for (std::size_t size = 0; size <= cap; ++size) {
                // k-subsets of `rest` in lexicographic order
                std::vector<std::size_t> idx(size);
                std::iota(idx.begin(), idx.end(), 0);
                while (true) {
                    std::set<std::string> zset;
                    for (std::size_t t : idx) zset.insert(rest[t]);
                    if (d_separated(graph, nodes[i], nodes[j], zset))
                        out.push_back(
                            {nodes[i], nodes[j], std::vector<std::string>(zset.begin(), zset.end())});
                    if (size == 0) break;
                    // next combination
                    std::size_t t = size;
                    while (t-- > 0) {
                        if (idx[t] != t + rest.size() - size) {
                            ++idx[t];
                            for (std::size_t u = t + 1; u < size; ++u) idx[u] = idx[u - 1] + 1;
                            break;
                        }
                        if (t == 0) goto done_size;
                    }
                    continue;
                done_size:
                    break;
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Data table

std::size_t DataTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw std::invalid_argument("data table: unknown column '" + name + "'");
}

void DataTable::validate() const {
    if (names.size() != columns.size() || names.size() != discrete.size())
        throw std::invalid_argument("data table: inconsistent column bookkeeping");
    for (const auto& col : columns)
        if (col.size() != rows()) throw std::invalid_argument("data table: ragged columns");
}

namespace {

// Integer level codes for one variable; continuous columns are cut at
// quantiles.
std::vector<int> level_codes(const std::vector<double>& values, bool is_discrete,
                             int quantile_bins) {
    std::vector<int> codes(values.size());
    if (is_discrete) {
        std::vector<double> levels(values);
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        for (std::size_t i = 0; i < values.size(); ++i)
            codes[i] = int(std::lower_bound(levels.begin(), levels.end(), values[i]) -
                           levels.begin());
        return codes;
    }
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (int b = 1; b < quantile_bins; ++b)
        cuts.push_back(sorted[sorted.size() * std::size_t(b) / std::size_t(quantile_bins)]);
    for (std::size_t i = 0; i < values.size(); ++i)
        codes[i] = int(std::upper_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
    return codes;
}

int level_count(const std::vector<int>& codes) {
    return codes.empty() ? 0 : *std::max_element(codes.begin(), codes.end()) + 1;
}

struct GTestResult {
    double p_value = 1.0;
    int skipped_strata = 0;
};

GTestResult stratified_g_test(const std::vector<int>& x, const std::vector<int>& y,
                              const std::vector<std::vector<int>>& z) {
    std::size_t n = x.size();
    int xl = level_count(x);
    int yl = level_count(y);
    std::vector<int> zl;
    for (const auto& col : z) zl.push_back(level_count(col));

    std::size_t strata = 1;
    for (int l : zl) strata *= std::size_t(l);

    GTestResult result;
    double g_total = 0.0;
    double df_total = 0.0;
    for (std::size_t s = 0; s < strata; ++s) {
        // Decode the stratum into per-variable levels.
        std::vector<int> want(z.size());
        std::size_t rem = s;
        for (std::size_t v = 0; v < z.size(); ++v) {
            want[v] = int(rem % std::size_t(zl[v]));
            rem /= std::size_t(zl[v]);
        }
        std::vector<double> table(std::size_t(xl) * std::size_t(yl), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            bool in = true;
            for (std::size_t v = 0; v < z.size(); ++v)
                if (z[v][i] != want[v]) {
                    in = false;
                    break;
                }
            if (!in) continue;
            table[std::size_t(x[i]) * std::size_t(yl) + std::size_t(y[i])] += 1.0;
            total += 1.0;
        }
        if (total == 0.0) {
            ++result.skipped_strata;
            continue;
        }
        std::vector<double> row(std::size_t(xl), 0.0), col(std::size_t(yl), 0.0);
        for (int r = 0; r < xl; ++r)
            for (int c = 0; c < yl; ++c) {
                row[std::size_t(r)] += table[std::size_t(r) * std::size_t(yl) + std::size_t(c)];
                col[std::size_t(c)] += table[std::size_t(r) * std::size_t(yl) + std::size_t(c)];
            }
        int r_nz = int(std::count_if(row.begin(), row.end(), [](double v) { return v > 0; }));
        int c_nz = int(std::count_if(col.begin(), col.end(), [](double v) { return v > 0; }));
        int df = (r_nz - 1) * (c_nz - 1);
        if (df <= 0) {
            ++result.skipped_strata;
            continue;
        }
        double g = 0.0;
        for (int r = 0; r < xl; ++r)
            for (int c = 0; c < yl; ++c) {
                double obs = table[std::size_t(r) * std::size_t(yl) + std::size_t(c)];
                if (obs <= 0.0) continue;
                double expected = row[std::size_t(r)] * col[std::size_t(c)] / total;
                g += 2.0 * obs * std::log(obs / expected);
            }
        g_total += g;
        df_total += df;
    }
    result.p_value = df_total > 0 ? stats::chi_square_sf(g_total, df_total) : 1.0;
    return result;
}

// Partial correlation of columns 0 and 1 given the rest, via the precision
// matrix of the correlation matrix.
double partial_correlation(const std::vector<const std::vector<double>*>& cols) {
    std::size_t d = cols.size();
    std::size_t n = cols.front()->size();
    std::vector<double> mu(d, 0.0), sd(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        mu[j] = stats::mean(cols[j]->data(), n);
        sd[j] = std::sqrt(stats::variance(cols[j]->data(), n));
        if (sd[j] < 1e-15) sd[j] = 1.0;
    }
    std::vector<std::vector<double>> corr(d, std::vector<double>(d, 0.0));
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += ((*cols[a])[i] - mu[a]) * ((*cols[b])[i] - mu[b]);
            acc /= double(n) * sd[a] * sd[b];
            corr[a][b] = corr[b][a] = acc;
        }
    if (d == 2) return corr[0][1];

    // Gauss-Jordan inversion with partial pivoting.
    std::vector<std::vector<double>> m = corr;
    std::vector<std::vector<double>> inv(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) inv[i][i] = 1.0;
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < d; ++r)
            if (std::abs(m[r][c]) > std::abs(m[pivot][c])) pivot = r;
        if (std::abs(m[pivot][c]) < 1e-12) return corr[0][1];  // singular: fall back
        std::swap(m[pivot], m[c]);
        std::swap(inv[pivot], inv[c]);
        double diag = m[c][c];
        for (std::size_t k = 0; k < d; ++k) {
            m[c][k] /= diag;
            inv[c][k] /= diag;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == c) continue;
            double factor = m[r][c];
            if (factor == 0.0) continue;
            for (std::size_t k = 0; k < d; ++k) {
                m[r][k] -= factor * m[c][k];
                inv[r][k] -= factor * inv[c][k];
            }
        }
    }
    return -inv[0][1] / std::sqrt(inv[0][0] * inv[1][1]);
}

}  // namespace

IndependenceTestReport test_implications(const CausalGraph& graph, const DataTable& data,
                                         double alpha_sig, const TestOptions& options) {
    data.validate();
    if (!(alpha_sig > 0.0 && alpha_sig < 1.0))
        throw std::invalid_argument("test_implications: alpha_sig must be in (0,1)");
    if (data.rows() < 30)
        throw std::invalid_argument("test_implications: need at least 30 rows");
    for (const std::string& node : graph.nodes()) data.column_index(node);

    IndependenceTestReport report;
    report.alpha_sig = alpha_sig;
    for (const Independence& triple : implied_independencies(graph, options.max_conditioning)) {
        IndependenceTest test;
        test.triple = triple;
        test.implied = true;

        std::vector<std::size_t> idx{data.column_index(triple.x), data.column_index(triple.y)};
        for (const std::string& zn : triple.z) idx.push_back(data.column_index(zn));
        bool all_continuous = true;
        for (std::size_t i : idx) all_continuous = all_continuous && !data.discrete[i];

        if (all_continuous) {
            test.method = "fisher-z";
            std::vector<const std::vector<double>*> cols;
            for (std::size_t i : idx) cols.push_back(&data.columns[i]);
            double n_eff = double(data.rows()) - double(triple.z.size()) - 3.0;
            double r = partial_correlation(cols);
            r = std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12);
            double zstat = std::atanh(r) * std::sqrt(std::max(n_eff, 1.0));
            test.p_value = std::erfc(std::abs(zstat) / std::sqrt(2.0));
        } else {
            test.method = "g-test";
            std::vector<int> x =
                level_codes(data.columns[idx[0]], data.discrete[idx[0]], options.quantile_bins);
            std::vector<int> y =
                level_codes(data.columns[idx[1]], data.discrete[idx[1]], options.quantile_bins);
            std::vector<std::vector<int>> z;
            for (std::size_t k = 2; k < idx.size(); ++k)
                z.push_back(level_codes(data.columns[idx[k]], data.discrete[idx[k]],
                                        options.quantile_bins));
            GTestResult g = stratified_g_test(x, y, z);
            test.p_value = g.p_value;
            test.skipped_strata = g.skipped_strata;
        }
        test.rejected = test.p_value < alpha_sig;
        report.tests.push_back(std::move(test));
    }
    return report;
}

void write_report_csv(std::ostream& os, const IndependenceTestReport& report) {
    os << "x,y,z,implied,method,p_value,rejected,skipped_strata\n";
    for (const IndependenceTest& t : report.tests) {
        os << t.triple.x << "," << t.triple.y << ",";
        for (std::size_t i = 0; i < t.triple.z.size(); ++i) os << (i ? ";" : "") << t.triple.z[i];
        os << "," << (t.implied ? "true" : "false") << "," << t.method << ","
           << fmt_double(t.p_value) << "," << (t.rejected ? "true" : "false") << ","
           << t.skipped_strata << "\n";
    }
}

// ---------------------------------------------------------------------------
// Backdoor adjustment

AdjustmentResult adjustment_set(const CausalGraph& graph, const std::string& treatment,
                                const std::string& outcome) {
    if (treatment == outcome)
        throw std::invalid_argument("adjustment_set: treatment equals outcome");
    if (!graph.has_node(treatment) || !graph.has_node(outcome))
        throw std::invalid_argument("adjustment_set: treatment and outcome must be graph nodes");

    CausalGraph surgered = graph;
    for (const std::string& c : graph.children(treatment)) surgered.remove_edge(treatment, c);

    std::set<std::string> banned = graph.descendants(treatment);
    banned.insert(treatment);
    banned.insert(outcome);
    std::vector<std::string> allowed;
    for (const std::string& n : graph.nodes())
        if (!banned.count(n)) allowed.push_back(n);

    for (std::size_t size = 0; size <= allowed.size(); ++size) {
        std::vector<std::size_t> idx(size);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            std::set<std::string> zset;
            for (std::size_t t : idx) zset.insert(allowed[t]);
            if (d_separated(surgered, treatment, outcome, zset)) return {true, zset};
            if (size == 0) break;
            std::size_t t = size;
            bool advanced = false;
            while (t-- > 0) {
                if (idx[t] != t + allowed.size() - size) {
                    ++idx[t];
                    for (std::size_t u = t + 1; u < size; ++u) idx[u] = idx[u - 1] + 1;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) break;
        }
    }
    return {false, {}};
}

// ---------------------------------------------------------------------------
// IPW

std::pair<double, IpwDiagnostics> estimate_ate_ipw(const DataTable& data,
                                                   const std::string& treatment,
                                                   const std::string& outcome,
                                                   const std::vector<std::string>& covariates,
                                                   bool stabilized) {
    data.validate();
    const std::vector<double>& t = data.columns[data.column_index(treatment)];
    const std::vector<double>& y = data.columns[data.column_index(outcome)];
    std::size_t n = data.rows();
    if (n == 0) throw std::invalid_argument("estimate_ate_ipw: empty dataset");

    std::size_t treated = 0;
    for (double v : t) {
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("estimate_ate_ipw: treatment must be binary 0/1");
        treated += v == 1.0;
    }
    if (treated == 0 || treated == n)
        throw std::invalid_argument("estimate_ate_ipw: both treatment arms must be present");

    // Standardized design matrix with intercept.
    std::size_t p = covariates.size();
    std::vector<std::vector<double>> x(p);
    for (std::size_t j = 0; j < p; ++j) {
        const std::vector<double>& raw = data.columns[data.column_index(covariates[j])];
        double mu = stats::mean(raw.data(), n);
        double sd = std::sqrt(stats::variance(raw.data(), n));
        if (sd < 1e-12) sd = 1.0;
        x[j].resize(n);
        for (std::size_t i = 0; i < n; ++i) x[j][i] = (raw[i] - mu) / sd;
    }

    // Logistic propensity by full-batch gradient ascent, zero init.
    std::vector<double> beta(p + 1, 0.0);
    const int iterations = 2000;
    const double rate = 1.0;
    std::vector<double> e(n);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> grad(p + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double lin = beta[0];
            for (std::size_t j = 0; j < p; ++j) lin += beta[j + 1] * x[j][i];
            double prob = 1.0 / (1.0 + std::exp(-lin));
            e[i] = prob;
            double resid = t[i] - prob;
            grad[0] += resid;
            for (std::size_t j = 0; j < p; ++j) grad[j + 1] += resid * x[j][i];
        }
        for (std::size_t j = 0; j <= p; ++j) beta[j] += rate * grad[j] / double(n);
    }

    IpwDiagnostics diag;
    diag.coefficients = beta;
    diag.treated = treated;
    diag.control = n - treated;

    double marginal = double(treated) / double(n);
    double sum_w1 = 0.0, sum_w1y = 0.0, sum_w0 = 0.0, sum_w0y = 0.0;
    double sum_y1 = 0.0, sum_y0 = 0.0;
    double w_min = std::numeric_limits<double>::infinity();
    double w_max = 0.0;
    double w_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double prop = std::clamp(e[i], 0.01, 0.99);
        if (prop != e[i]) ++diag.clipped_propensities;
        double w;
        if (t[i] == 1.0) {
            w = (stabilized ? marginal : 1.0) / prop;
            sum_w1 += w;
            sum_w1y += w * y[i];
            sum_y1 += y[i];
        } else {
            w = (stabilized ? 1.0 - marginal : 1.0) / (1.0 - prop);
            sum_w0 += w;
            sum_w0y += w * y[i];
            sum_y0 += y[i];
        }
        w_min = std::min(w_min, w);
        w_max = std::max(w_max, w);
        w_sum += w;
    }
    diag.min_weight = w_min;
    diag.max_weight = w_max;
    diag.mean_weight = w_sum / double(n);
    diag.naive_difference = sum_y1 / double(treated) - sum_y0 / double(n - treated);

    double ate = sum_w1y / sum_w1 - sum_w0y / sum_w0;
    return {ate, diag};
}

// ---------------------------------------------------------------------------
// Feedback

std::pair<CausalGraph, FeedbackPlan> refine_graph(const CausalGraph& pilot,
                                                  const IndependenceTestReport& report,
                                                  const std::map<std::string, double>& effects,
                                                  std::size_t budget, double negligibility) {
    CausalGraph g = pilot;
    FeedbackPlan plan;
    plan.effects = effects;
    plan.negligibility = negligibility;
    std::size_t edits = 0;

    for (const IndependenceTest& test : report.tests) {
        if (!test.implied || !test.rejected) continue;
        if (edits >= budget) break;
        const Independence& t = test.triple;
        std::set<std::string> zset(t.z.begin(), t.z.end());
        if (!g.has_node(t.x) || !g.has_node(t.y)) continue;
        if (!d_separated(g, t.x, t.y, zset)) continue;  // repaired by an earlier edit
        // A direct edge removes the implication for every conditioning set;
        // candidates in lexicographic (parent, child) order.
        for (const auto& [parent, child] :
             {std::pair(t.x, t.y), std::pair(t.y, t.x)}) {
            try {
                g.add_edge(parent, child);
            } catch (const std::invalid_argument&) {
                continue;  // would create a cycle
            }
            plan.added_edges.push_back({parent, child});
            ++edits;
            break;
        }
    }

    for (const auto& [var, effect] : effects) {
        if (edits >= budget) break;
        if (std::abs(effect) >= negligibility) continue;
        if (!g.has_node(var)) continue;
        bool surviving = false;
        for (const IndependenceTest& test : report.tests) {
            if (!test.implied || test.rejected) continue;
            if (test.triple.x == var || test.triple.y == var ||
                std::count(test.triple.z.begin(), test.triple.z.end(), var)) {
                surviving = true;
                break;
            }
        }
        if (surviving) continue;
        std::size_t cost = 1 + g.parents(var).size() + g.children(var).size();
        if (edits + cost > budget) continue;
        for (const std::string& parent : g.parents(var)) plan.removed_edges.push_back({parent, var});
        for (const std::string& child : g.children(var)) plan.removed_edges.push_back({var, child});
        g.remove_node(var);
        plan.remove_variables.push_back(var);
        edits += cost;
    }

    return {std::move(g), std::move(plan)};
}

std::size_t graph_distance(const CausalGraph& g1, const CausalGraph& g2) {
    std::size_t d = 0;
    std::set<std::string> all;
    for (const std::string& n : g1.nodes()) {
        all.insert(n);
        if (!g2.has_node(n)) ++d;
    }
    for (const std::string& n : g2.nodes()) {
        all.insert(n);
        if (!g1.has_node(n)) ++d;
    }
    std::vector<std::string> nodes(all.begin(), all.end());
    auto state = [](const CausalGraph& g, const std::string& u, const std::string& v) {
        if (g.has_node(u) && g.has_node(v)) {
            if (g.has_edge(u, v)) return 1;
            if (g.has_edge(v, u)) return 2;
        }
        return 0;
    };
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if (state(g1, nodes[i], nodes[j]) != state(g2, nodes[i], nodes[j])) ++d;
    return d;
}

}  // namespace cphs::causal
