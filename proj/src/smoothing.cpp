#include "sceneparse/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace sceneparse {

CooccurrenceTable build_cooccurrence(const std::vector<LabelMask>& masks, int label_count,
                                     double add_smoothing) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(label_count, label_count);
    bool any = false;
    for (const LabelMask& mask : masks) {
        const int w = mask.width(), h = mask.height();
        auto tally = [&](int la, int lb) {
            if (la == kVoidLabel || lb == kVoidLabel) return;
            if (la >= label_count || lb >= label_count)
                throw InvalidInput("build_cooccurrence: label out of range");
            counts(la, lb) += 1.0;
            counts(lb, la) += 1.0;
            any = true;
        };
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (x + 1 < w) tally(mask.at(x, y), mask.at(x + 1, y));
                if (y + 1 < h) tally(mask.at(x, y), mask.at(x, y + 1));
            }
    }
    if (!any) throw InvalidInput("build_cooccurrence: no labeled adjacencies");

    counts.array() += add_smoothing;
    CooccurrenceTable table;
    table.P = Eigen::MatrixXd::Zero(label_count, label_count);
    for (int b = 0; b < label_count; ++b) {
        double column_total = counts.col(b).sum();
        if (column_total > 0) table.P.col(b) = counts.col(b) / column_total;
    }
    return table;
}

MaxFlow::MaxFlow(int node_count) : arcs_(node_count), level_(node_count), iter_(node_count) {}

void MaxFlow::add_edge(int from, int to, double capacity, double reverse_capacity) {
    arcs_[from].push_back({to, capacity, static_cast<int>(arcs_[to].size())});
    arcs_[to].push_back({from, reverse_capacity, static_cast<int>(arcs_[from].size()) - 1});
}

bool MaxFlow::bfs_levels(int source, int sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> queue;
    level_[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop();
        for (const Arc& a : arcs_[u]) {
            if (a.cap > 1e-12 && level_[a.to] < 0) {
                level_[a.to] = level_[u] + 1;
                queue.push(a.to);
            }
        }
    }
    return level_[sink] >= 0;
}

double MaxFlow::dfs_augment(int u, int sink, double limit) {
    if (u == sink) return limit;
    for (size_t& i = iter_[u]; i < arcs_[u].size(); ++i) {
        Arc& a = arcs_[u][i];
        if (a.cap > 1e-12 && level_[a.to] == level_[u] + 1) {
            double pushed = dfs_augment(a.to, sink, std::min(limit, a.cap));
            if (pushed > 0) {
                a.cap -= pushed;
                arcs_[a.to][a.rev].cap += pushed;
                return pushed;
            }
        }
    }
    return 0.0;
}

double MaxFlow::solve(int source, int sink) {
    double flow = 0.0;
    while (bfs_levels(source, sink)) {
        std::fill(iter_.begin(), iter_.end(), 0);
        while (true) {
            double pushed = dfs_augment(source, sink, std::numeric_limits<double>::infinity());
            if (pushed <= 0) break;
            flow += pushed;
        }
    }
    return flow;
}

bool MaxFlow::min_cut_source_side(int node) const {
    // level_ holds the last BFS, which failed to reach the sink: reachable
    // nodes through residual capacity form the source side.
    return level_[node] >= 0;
}

double MrfProblem::energy(const std::vector<int>& labeling) const {
    double e = 0.0;
    for (int p = 0; p < node_count; ++p) e += data_costs(p, labeling[p]);
    for (const MrfEdge& edge : edges)
        e += lambda * edge.xi * pairwise(labeling[edge.a], labeling[edge.b]);
    return e;
}

double pairwise_term(int label_a, int label_b, const CooccurrenceTable& cooc, double xi,
                     double probability_floor) {
    if (label_a == label_b) return 0.0;
    double p = (cooc.P(label_a, label_b) + cooc.P(label_b, label_a)) / 2.0;
    return xi * -std::log(std::max(p, probability_floor));
}

MrfProblem make_mrf_problem(Eigen::MatrixXd data_costs, std::vector<MrfEdge> edges,
                            const CooccurrenceTable& cooc, double lambda,
                            double probability_floor) {
    MrfProblem problem;
    problem.node_count = static_cast<int>(data_costs.rows());
    problem.label_count = static_cast<int>(data_costs.cols());
    problem.data_costs = std::move(data_costs);
    problem.edges = std::move(edges);
    problem.lambda = lambda;

    const int nl = problem.label_count;
    problem.pairwise.resize(nl, nl);
    for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b)
            problem.pairwise(a, b) = pairwise_term(a, b, cooc, 1.0, probability_floor);

    // Semi-metric requirements for swap moves.
    for (int a = 0; a < nl; ++a) {
        if (problem.pairwise(a, a) != 0.0)
            throw InvalidInput("make_mrf_problem: pairwise(a,a) must be 0");
        for (int b = 0; b < nl; ++b) {
            if (problem.pairwise(a, b) < 0.0)
                throw InvalidInput("make_mrf_problem: negative pairwise cost");
            if (std::abs(problem.pairwise(a, b) - problem.pairwise(b, a)) > 1e-12)
                throw InvalidInput("make_mrf_problem: pairwise cost not symmetric");
        }
    }
    if (!problem.data_costs.allFinite())
        throw InvalidInput("make_mrf_problem: non-finite data cost");
    for (const MrfEdge& e : problem.edges)
        if (e.xi < 0) throw InvalidInput("make_mrf_problem: negative edge weight");
    return problem;
}

Eigen::MatrixXd data_term(const LabelLikelihoodField& field, const SuperPixelMap& map) {
    const int n_labels = static_cast<int>(field.likelihoods.cols());
    Eigen::MatrixXd costs(static_cast<Eigen::Index>(map.width) * map.height, n_labels);
    for (const Segment& seg : map.segments) {
        Eigen::RowVectorXd row = -field.likelihoods.row(seg.id).array().log();
        for (int p : seg.pixels) costs.row(p) = row;
    }
    return costs;
}

std::vector<MrfEdge> gradient_edges(const Image& image) {
    const int w = image.width(), h = image.height();
    std::vector<MrfEdge> edges;
    edges.reserve(static_cast<size_t>(2) * w * h);
    double total = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int p = y * w + x;
            if (x + 1 < w) {
                double d = image.luminance(x, y) - image.luminance(x + 1, y);
                edges.push_back({p, p + 1, d * d});
                total += d * d;
            }
            if (y + 1 < h) {
                double d = image.luminance(x, y) - image.luminance(x, y + 1);
                edges.push_back({p, p + w, d * d});
                total += d * d;
            }
        }
    }
    if (total > 0) {
        for (auto& e : edges) e.xi /= total;
    } else if (!edges.empty()) {
        double uniform = 1.0 / static_cast<double>(edges.size());
        for (auto& e : edges) e.xi = uniform;
    }
    return edges;
}

namespace {

// One swap move for the pair (alpha, beta): an exact binary min-cut over the
// pixels currently carrying either label.
bool try_swap_move(const MrfProblem& problem, std::vector<int>& labeling, double& current_energy,
                   int alpha, int beta, std::vector<double>& trace) {
    std::vector<int> node_of(problem.node_count, -1);
    std::vector<int> participants;
    for (int p = 0; p < problem.node_count; ++p) {
        if (labeling[p] == alpha || labeling[p] == beta) {
            node_of[p] = static_cast<int>(participants.size());
            participants.push_back(p);
        }
    }
    if (participants.empty()) return false;

    const int n = static_cast<int>(participants.size());
    const int source = n, sink = n + 1;
    MaxFlow graph(n + 2);

    std::vector<double> to_alpha(n, 0.0), to_beta(n, 0.0);
    for (int i = 0; i < n; ++i) {
        int p = participants[i];
        to_alpha[i] = problem.data_costs(p, alpha);
        to_beta[i] = problem.data_costs(p, beta);
    }
    for (size_t ei = 0; ei < problem.edges.size(); ++ei) {
        const MrfEdge& e = problem.edges[ei];
        int na = node_of[e.a], nb = node_of[e.b];
        double scale = problem.lambda * e.xi;
        if (na >= 0 && nb >= 0) {
            double cap = scale * problem.pairwise(alpha, beta);
            if (cap > 0) graph.add_edge(na, nb, cap, cap);
        } else if (na >= 0) {
            to_alpha[na] += scale * problem.pairwise(alpha, labeling[e.b]);
            to_beta[na] += scale * problem.pairwise(beta, labeling[e.b]);
        } else if (nb >= 0) {
            to_alpha[nb] += scale * problem.pairwise(alpha, labeling[e.a]);
            to_beta[nb] += scale * problem.pairwise(beta, labeling[e.a]);
        }
    }
    for (int i = 0; i < n; ++i) {
        // Data costs may be negative (likelihood ratios above 1); shifting
        // both t-links by their minimum keeps capacities valid without
        // changing which side is cheaper.
        double shift = std::min(to_alpha[i], to_beta[i]);
        // source side = alpha; the cut pays the opposite-side link.
        graph.add_edge(source, i, to_beta[i] - shift);
        graph.add_edge(i, sink, to_alpha[i] - shift);
    }
    graph.solve(source, sink);

    std::vector<int> candidate = labeling;
    for (int i = 0; i < n; ++i)
        candidate[participants[i]] = graph.min_cut_source_side(i) ? alpha : beta;

    double candidate_energy = problem.energy(candidate);
    if (candidate_energy < current_energy - 1e-12) {
        labeling = std::move(candidate);
        current_energy = candidate_energy;
        trace.push_back(current_energy);
        return true;
    }
    return false;
}

// Greedy single-pixel relabeling pass; escapes pair-swap local optima that a
// one-pixel move can improve. Returns true if anything changed.
bool icm_pass(const MrfProblem& problem, std::vector<int>& labeling, double& current_energy,
              std::vector<double>& trace) {
    // Incident pairwise cost deltas need the adjacency per pixel.
    std::vector<std::vector<const MrfEdge*>> incident(problem.node_count);
    for (const MrfEdge& e : problem.edges) {
        incident[e.a].push_back(&e);
        incident[e.b].push_back(&e);
    }
    bool changed = false;
    for (int p = 0; p < problem.node_count; ++p) {
        int current = labeling[p];
        int best = current;
        double best_delta = 0.0;
        for (int l = 0; l < problem.label_count; ++l) {
            if (l == current) continue;
            double delta = problem.data_costs(p, l) - problem.data_costs(p, current);
            for (const MrfEdge* e : incident[p]) {
                int other = labeling[e->a == p ? e->b : e->a];
                delta += problem.lambda * e->xi *
                         (problem.pairwise(l, other) - problem.pairwise(current, other));
            }
            if (delta < best_delta - 1e-12) {
                best_delta = delta;
                best = l;
            }
        }
        if (best != current) {
            labeling[p] = best;
            current_energy += best_delta;
            trace.push_back(current_energy);
            changed = true;
        }
    }
    return changed;
}

}  // namespace

SwapResult alpha_beta_swap(const MrfProblem& problem, std::vector<int> initial_labeling) {
    if (static_cast<int>(initial_labeling.size()) != problem.node_count)
        throw InvalidInput("alpha_beta_swap: labeling size mismatch");
    for (int l : initial_labeling)
        if (l < 0 || l >= problem.label_count)
            throw InvalidInput("alpha_beta_swap: label out of range");

    SwapResult result;
    result.labeling = std::move(initial_labeling);
    result.energy = problem.energy(result.labeling);

    constexpr int kMaxSweeps = 10;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool any_accepted = false;
        for (int alpha = 0; alpha < problem.label_count; ++alpha) {
            for (int beta = alpha + 1; beta < problem.label_count; ++beta) {
                if (try_swap_move(problem, result.labeling, result.energy, alpha, beta,
                                  result.energy_trace))
                    any_accepted = true;
            }
        }
        // Swap moves converged: polish with single-pixel moves, which can
        // break ties the pair moves cannot; resume sweeping if they bite.
        if (!any_accepted &&
            !icm_pass(problem, result.labeling, result.energy, result.energy_trace))
            break;
    }
    // Guard against float drift in the incremental ICM updates.
    result.energy = problem.energy(result.labeling);
    return result;
}

}  // namespace sceneparse
