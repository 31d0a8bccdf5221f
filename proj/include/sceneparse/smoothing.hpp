#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sceneparse/classify.hpp"
#include "sceneparse/image.hpp"
#include "sceneparse/segmentation.hpp"

namespace sceneparse {

/// P(row | col): conditional probability a pixel has the row label given a
/// 4-neighbor has the column label. Columns with support sum to 1.
struct CooccurrenceTable {
    Eigen::MatrixXd P;

    int label_count() const { return static_cast<int>(P.rows()); }
};

/// Counts ordered 4-adjacent labeled pixel pairs across all masks; void
/// pixels are skipped. `add_smoothing` is added to every directed count.
CooccurrenceTable build_cooccurrence(const std::vector<LabelMask>& masks, int label_count,
                                     double add_smoothing = 1.0);

/// Exact max-flow / min-cut (Dinic). After solve(), min_cut_side reports
/// whether a node sits on the source side of a minimum cut.
class MaxFlow {
public:
    explicit MaxFlow(int node_count);
    void add_edge(int from, int to, double capacity, double reverse_capacity = 0.0);
    double solve(int source, int sink);
    bool min_cut_source_side(int node) const;

private:
    struct Arc {
        int to;
        double cap;
        int rev;
    };
    bool bfs_levels(int source, int sink);
    double dfs_augment(int u, int sink, double limit);

    std::vector<std::vector<Arc>> arcs_;
    std::vector<int> level_;
    std::vector<size_t> iter_;
};

struct MrfEdge {
    int a = 0, b = 0;  // pixel indices
    double xi = 0.0;   // normalized gradient weight
};

/// Pixel-level labeling problem: unary costs plus gradient-weighted
/// co-occurrence penalties over 4-connected edges.
struct MrfProblem {
    int node_count = 0;
    int label_count = 0;
    Eigen::MatrixXd data_costs;   // node_count x label_count
    std::vector<MrfEdge> edges;
    Eigen::MatrixXd pairwise;     // label x label, semi-metric, unscaled by xi/lambda
    double lambda = 16.0;

    double energy(const std::vector<int>& labeling) const;
};

/// Validates the semi-metric conditions; throws InvalidInput on violation.
MrfProblem make_mrf_problem(Eigen::MatrixXd data_costs, std::vector<MrfEdge> edges,
                            const CooccurrenceTable& cooc, double lambda,
                            double probability_floor = 1e-6);

/// Per-pixel cost -log L(k*, l) replicated from each pixel's super-pixel.
Eigen::MatrixXd data_term(const LabelLikelihoodField& field, const SuperPixelMap& map);

/// 0 for equal labels, else xi * -log((P(a|b)+P(b|a))/2) with floored probs.
double pairwise_term(int label_a, int label_b, const CooccurrenceTable& cooc, double xi,
                     double probability_floor = 1e-6);

/// 4-connected pixel edges with squared-luminance-difference weights,
/// normalized to sum 1 (uniform when the image is flat).
std::vector<MrfEdge> gradient_edges(const Image& image);

struct SwapResult {
    std::vector<int> labeling;
    double energy = 0.0;
    std::vector<double> energy_trace;  // energy after each accepted move
};

/// alpha-beta swap over all label pairs until a sweep accepts no move
/// (hard cap 10 sweeps). Each move is an exact binary min-cut; moves are
/// accepted only when the energy does not increase.
SwapResult alpha_beta_swap(const MrfProblem& problem, std::vector<int> initial_labeling);

}  // namespace sceneparse
