#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sceneparse/classify.hpp"
#include "sceneparse/eval.hpp"
#include "sceneparse/features.hpp"
#include "sceneparse/lda.hpp"
#include "sceneparse/retrieval.hpp"
#include "sceneparse/smoothing.hpp"

namespace sceneparse {

/// One switch per knob the paper leaves to configuration; snapshotted into
/// the model bundle so parsing is a pure function of bundle + image.
struct Config {
    SegmentParams segment;
    FeatureRegistry registry = FeatureRegistry::defaults();
    double lda_ridge = -1.0;   // <0: auto 1e-4 * tr(S_w)/n_x
    int k_m = 1000;
    double tau = 0.3;
    double lambda = 16.0;
    double epsilon = 1.0;      // additive smoothing in the likelihood ratio
    int k_max = 50;
    int fallback_k = 20;
    int loo_max_images = -1;   // cap on accuracy-table rows; -1 = all
    double cooc_smoothing = 1.0;
    double probability_floor = 1e-6;

    std::string to_json() const;
    static Config from_json(const std::string& text);
    static Config load(const std::string& path);
};

struct DatasetPair {
    std::string image;
    std::string mask;
};

struct DatasetManifest {
    std::string root;
    std::vector<DatasetPair> train;
    std::vector<DatasetPair> test;
    std::vector<std::string> label_names;

    static DatasetManifest load(const std::string& dir);
    std::string resolve(const std::string& relative) const;
};

/// Persisted training artifact: projection, index, tables, configuration.
struct ModelBundle {
    static constexpr int kFormatVersion = 1;

    LdaModel lda;
    TrainingIndex index;
    AccuracyTable accuracy;
    CooccurrenceTable cooccurrence;
    std::vector<std::string> label_names;
    Config config;

    void save(const std::string& dir) const;
    static ModelBundle load(const std::string& dir);
};

struct ParseFlags {
    std::optional<int> fixed_k;
    std::optional<double> lambda;
    std::string dump_retrieval;  // CSV path, empty = off
    std::string trace_energy;    // CSV path, empty = off
};

struct ParseResult {
    LabelMask labels;          // after contextual smoothing
    LabelMask initial_labels;  // pixel-projected initial labels
    int k_star = 0;
    RetrievalSet retrieval;
    double final_energy = 0.0;
    std::vector<double> energy_trace;
};

ModelBundle train(const DatasetManifest& manifest, const Config& config, bool verbose = false);

ParseResult parse_image(const Image& image, const ModelBundle& bundle,
                        const ParseFlags& flags = {});

struct EvaluateResult {
    ParseReport report;
    std::vector<double> per_image_rates;
    std::vector<std::string> image_names;
};

EvaluateResult evaluate(const DatasetManifest& manifest, const ModelBundle& bundle,
                        const ParseFlags& flags = {}, bool verbose = false);

struct GridPoint {
    double tau = 0.0;
    int k_m = 0;
    double score = 0.0;
};

struct GridSearchResult {
    double best_tau = 0.0;
    int best_k_m = 0;
    std::vector<GridPoint> table;
};

/// Leave-one-out accuracy (with adaptive k) per (tau, k_m) grid point;
/// ties prefer smaller k_m, then smaller tau. Default grids follow the
/// 0.1..0.5 x 500..2500 pattern (25 points).
GridSearchResult grid_search(const DatasetManifest& manifest, const Config& config,
                             std::vector<double> tau_grid = {},
                             std::vector<int> km_grid = {}, bool verbose = false);

struct SynthParams {
    int width = 64;
    int height = 64;
    int max_objects = 3;  // 1..3 colored objects per image
    int test_count = 4;   // images assigned to the test split
};

/// Deterministic synthetic scene dataset: gradient sky band, textured
/// ground, and colored objects with exact masks. Writes images, masks,
/// labels.txt, and manifest.json under out_dir.
void gen_synth(uint64_t seed, int n_images, const std::string& out_dir,
               const SynthParams& params = {});

}  // namespace sceneparse
