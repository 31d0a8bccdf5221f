#include "sceneparse/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "sceneparse/parallel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sceneparse {

namespace {

json registry_to_json(const FeatureRegistry& r) {
    json channels = json::array();
    for (Channel c : r.enabled) channels.push_back(to_string(c));
    return json{{"channels", channels},
                {"mask_size", r.mask_size},
                {"thumb_size", r.thumb_size},
                {"color_hist_bins", r.color_hist_bins},
                {"dilation_radius", r.dilation_radius},
                {"tex_orient_bins", r.tex_orient_bins},
                {"tex_mag_bins", r.tex_mag_bins},
                {"gist_grid", r.gist_grid},
                {"gist_orient_bins", r.gist_orient_bins}};
}

FeatureRegistry registry_from_json(const json& j) {
    FeatureRegistry r;
    r.enabled.clear();
    for (const auto& name : j.at("channels")) r.enabled.push_back(channel_from_string(name));
    r.mask_size = j.value("mask_size", r.mask_size);
    r.thumb_size = j.value("thumb_size", r.thumb_size);
    r.color_hist_bins = j.value("color_hist_bins", r.color_hist_bins);
    r.dilation_radius = j.value("dilation_radius", r.dilation_radius);
    r.tex_orient_bins = j.value("tex_orient_bins", r.tex_orient_bins);
    r.tex_mag_bins = j.value("tex_mag_bins", r.tex_mag_bins);
    r.gist_grid = j.value("gist_grid", r.gist_grid);
    r.gist_orient_bins = j.value("gist_orient_bins", r.gist_orient_bins);
    return r;
}

json config_to_json(const Config& c) {
    return json{{"segment", {{"scale", c.segment.scale},
                             {"sigma", c.segment.sigma},
                             {"min_size", c.segment.min_size}}},
                {"registry", registry_to_json(c.registry)},
                {"lda_ridge", c.lda_ridge},
                {"k_m", c.k_m},
                {"tau", c.tau},
                {"lambda", c.lambda},
                {"epsilon", c.epsilon},
                {"k_max", c.k_max},
                {"fallback_k", c.fallback_k},
                {"loo_max_images", c.loo_max_images},
                {"cooc_smoothing", c.cooc_smoothing},
                {"probability_floor", c.probability_floor}};
}

Config config_from_json(const json& j) {
    Config c;
    if (j.contains("segment")) {
        const auto& s = j.at("segment");
        c.segment.scale = s.value("scale", c.segment.scale);
        c.segment.sigma = s.value("sigma", c.segment.sigma);
        c.segment.min_size = s.value("min_size", c.segment.min_size);
    }
    if (j.contains("registry")) c.registry = registry_from_json(j.at("registry"));
    c.lda_ridge = j.value("lda_ridge", c.lda_ridge);
    c.k_m = j.value("k_m", c.k_m);
    c.tau = j.value("tau", c.tau);
    c.lambda = j.value("lambda", c.lambda);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.k_max = j.value("k_max", c.k_max);
    c.fallback_k = j.value("fallback_k", c.fallback_k);
    c.loo_max_images = j.value("loo_max_images", c.loo_max_images);
    c.cooc_smoothing = j.value("cooc_smoothing", c.cooc_smoothing);
    c.probability_floor = j.value("probability_floor", c.probability_floor);
    return c;
}

void write_f64(const fs::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    // row-major little-endian float64
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            double v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
}

Eigen::MatrixXd read_f64(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) throw IoError("truncated array file: " + path.string());
            m(r, c) = v;
        }
    return m;
}

/// Segmented, described, projected form of one image.
struct PreparedImage {
    SuperPixelMap map;
    std::vector<Eigen::VectorXd> reduced;
};

PreparedImage prepare_image(const Image& image, const LdaModel& lda, const Config& config) {
    PreparedImage out;
    out.map = oversegment(image, config.segment);
    auto features = extract(image, out.map, config.registry);
    out.reduced.reserve(features.size());
    for (const auto& f : features) out.reduced.push_back(lda.project(f));
    return out;
}

void dump_retrieval_csv(const std::string& path, const RetrievalSet& rset) {
    std::ofstream out(path);
    out << "rank,image_id,score,in_retrieval_set\n";
    for (size_t i = 0; i < rset.image_ids.size(); ++i)
        out << i + 1 << "," << rset.image_ids[i] << "," << rset.scores[i] << ","
            << (static_cast<int>(i) < rset.k_r ? 1 : 0) << "\n";
}

void dump_energy_csv(const std::string& path, const std::vector<double>& trace) {
    std::ofstream out(path);
    out << "move,energy\n";
    for (size_t i = 0; i < trace.size(); ++i) out << i + 1 << "," << trace[i] << "\n";
}

}  // namespace

std::string Config::to_json() const { return config_to_json(*this).dump(2); }

Config Config::from_json(const std::string& text) {
    return config_from_json(json::parse(text));
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

DatasetManifest DatasetManifest::load(const std::string& dir) {
    fs::path root(dir);
    std::ifstream in(root / "manifest.json");
    if (!in) throw IoError("cannot open " + (root / "manifest.json").string());
    json j = json::parse(in);

    DatasetManifest m;
    m.root = dir;
    auto read_pairs = [&](const char* key, std::vector<DatasetPair>& out) {
        if (!j.contains(key)) return;
        for (const auto& entry : j.at(key))
            out.push_back({entry.at("image").get<std::string>(),
                           entry.at("mask").get<std::string>()});
    };
    read_pairs("train", m.train);
    read_pairs("test", m.test);

    std::string labels_file = j.value("labels", "labels.txt");
    std::ifstream labels(root / labels_file);
    if (!labels) throw IoError("cannot open label dictionary " + (root / labels_file).string());
    std::string line;
    while (std::getline(labels, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) m.label_names.push_back(line);
    }
    for (const auto& pair : m.train) {
        if (!fs::exists(m.resolve(pair.image)) || !fs::exists(m.resolve(pair.mask)))
            throw IoError("manifest references missing file: " + pair.image);
    }
    for (const auto& pair : m.test) {
        if (!fs::exists(m.resolve(pair.image)) || !fs::exists(m.resolve(pair.mask)))
            throw IoError("manifest references missing file: " + pair.image);
    }
    return m;
}

std::string DatasetManifest::resolve(const std::string& relative) const {
    return (fs::path(root) / relative).string();
}

void ModelBundle::save(const std::string& dir) const {
    fs::create_directories(dir);
    fs::path root(dir);

    write_f64(root / "lda_w.f64", lda.W);
    write_f64(root / "lda_mean.f64", lda.feature_mean);
    write_f64(root / "lda_eigenvalues.f64", lda.eigenvalues);
    write_f64(root / "index_t.f64", index.T);
    write_f64(root / "accuracy.f64", accuracy.A);
    write_f64(root / "cooccurrence.f64", cooccurrence.P);

    json j;
    j["format_version"] = kFormatVersion;
    j["config"] = config_to_json(config);
    j["label_names"] = label_names;
    j["lda"] = {{"rows", lda.W.rows()},
                {"cols", lda.W.cols()},
                {"ridge", lda.ridge},
                {"label_count", lda.label_count}};
    j["index"] = {{"rows", index.T.rows()},
                  {"cols", index.T.cols()},
                  {"image_of", index.image_of},
                  {"labels", index.labels},
                  {"per_image_counts", index.per_image_counts},
                  {"global_label_counts", index.global_label_counts},
                  {"image_count", index.image_count},
                  {"label_count", index.label_count}};
    j["accuracy"] = {{"rows", accuracy.A.rows()},
                     {"cols", accuracy.A.cols()},
                     {"valid", std::vector<int>(accuracy.valid.begin(), accuracy.valid.end())}};
    j["cooccurrence"] = {{"size", cooccurrence.P.rows()}};

    std::ofstream out(root / "bundle.json");
    if (!out) throw IoError("cannot write " + (root / "bundle.json").string());
    out << j.dump(2) << "\n";
}

ModelBundle ModelBundle::load(const std::string& dir) {
    fs::path root(dir);
    std::ifstream in(root / "bundle.json");
    if (!in) throw IoError("cannot open bundle " + dir);
    json j = json::parse(in);
    if (j.at("format_version").get<int>() != kFormatVersion)
        throw IoError("bundle format version mismatch in " + dir);

    ModelBundle b;
    b.config = config_from_json(j.at("config"));
    b.label_names = j.at("label_names").get<std::vector<std::string>>();

    const auto& jl = j.at("lda");
    b.lda.W = read_f64(root / "lda_w.f64", jl.at("rows"), jl.at("cols"));
    b.lda.feature_mean = read_f64(root / "lda_mean.f64", jl.at("cols"), 1);
    b.lda.eigenvalues = read_f64(root / "lda_eigenvalues.f64", jl.at("rows"), 1);
    b.lda.ridge = jl.at("ridge");
    b.lda.label_count = jl.at("label_count");

    const auto& ji = j.at("index");
    b.index.T = read_f64(root / "index_t.f64", ji.at("rows"), ji.at("cols"));
    b.index.image_of = ji.at("image_of").get<std::vector<int>>();
    b.index.labels = ji.at("labels").get<std::vector<int>>();
    b.index.per_image_counts = ji.at("per_image_counts").get<std::vector<int>>();
    b.index.global_label_counts = ji.at("global_label_counts").get<std::vector<long long>>();
    b.index.image_count = ji.at("image_count");
    b.index.label_count = ji.at("label_count");
    b.index.validate();

    const auto& ja = j.at("accuracy");
    b.accuracy.A = read_f64(root / "accuracy.f64", ja.at("rows"), ja.at("cols"));
    auto valid = ja.at("valid").get<std::vector<int>>();
    b.accuracy.valid.assign(valid.begin(), valid.end());

    Eigen::Index nc = j.at("cooccurrence").at("size");
    b.cooccurrence.P = read_f64(root / "cooccurrence.f64", nc, nc);

    if (static_cast<int>(b.label_names.size()) != b.index.label_count)
        throw IoError("bundle label dictionary does not match index");
    return b;
}

ModelBundle train(const DatasetManifest& manifest, const Config& config, bool verbose) {
    const int n_images = static_cast<int>(manifest.train.size());
    if (n_images < 1) throw InvalidInput("train: empty training split");
    const int label_count = static_cast<int>(manifest.label_names.size());
    if (label_count < 2) throw InvalidInput("train: need at least 2 labels");

    struct RawImage {
        SuperPixelMap map;
        LabelMask mask;
        std::vector<FeatureVector> features;
        std::vector<std::optional<int>> segment_labels;
    };
    std::vector<RawImage> raw(n_images);

    parallel_for(n_images, [&](int i) {
        const auto& pair = manifest.train[i];
        Image image;
        LabelMask mask;
        try {
            image = load_image(manifest.resolve(pair.image));
            mask = load_mask(manifest.resolve(pair.mask));
        } catch (const std::exception& e) {
            throw IoError("train: failed reading " + pair.image + ": " + e.what());
        }
        if (mask.width() != image.width() || mask.height() != image.height())
            throw InvalidInput("train: image/mask dimension mismatch for " + pair.image);

        RawImage& r = raw[i];
        r.map = oversegment(image, config.segment);
        r.features = extract(image, r.map, config.registry);
        r.mask = std::move(mask);
        r.segment_labels.reserve(r.map.segments.size());
        for (const Segment& seg : r.map.segments)
            r.segment_labels.push_back(assign_training_label(seg, r.mask));
    });
    if (verbose) std::fprintf(stderr, "train: segmented %d images\n", n_images);

    // Assemble the labeled sample for LDA and the index.
    std::vector<int> flat_labels, flat_image;
    std::vector<const FeatureVector*> flat_features;
    for (int i = 0; i < n_images; ++i)
        for (size_t s = 0; s < raw[i].segment_labels.size(); ++s)
            if (raw[i].segment_labels[s]) {
                int l = *raw[i].segment_labels[s];
                if (l >= label_count)
                    throw InvalidInput("train: mask label exceeds label dictionary");
                flat_labels.push_back(l);
                flat_image.push_back(i);
                flat_features.push_back(&raw[i].features[s]);
            }
    if (flat_labels.empty()) throw InvalidInput("train: no labeled super-pixels");

    std::vector<char> label_present(label_count, 0);
    for (int l : flat_labels) label_present[l] = 1;
    if (std::count(label_present.begin(), label_present.end(), 1) < 2)
        throw InvalidInput("train: fewer than 2 labels present in training masks");

    const Eigen::Index n_x = flat_features.front()->size();
    Eigen::MatrixXd X(static_cast<Eigen::Index>(flat_features.size()), n_x);
    for (size_t i = 0; i < flat_features.size(); ++i) X.row(i) = flat_features[i]->transpose();

    // LDA requires every class id in [0, label_count) to have samples; remap
    // to the present classes for fitting, keeping original ids elsewhere.
    std::vector<int> class_remap(label_count, -1);
    int present_count = 0;
    for (int l = 0; l < label_count; ++l)
        if (label_present[l]) class_remap[l] = present_count++;
    std::vector<int> fit_labels(flat_labels.size());
    for (size_t i = 0; i < flat_labels.size(); ++i) fit_labels[i] = class_remap[flat_labels[i]];

    ModelBundle bundle;
    bundle.config = config;
    bundle.label_names = manifest.label_names;
    bundle.lda = fit_lda(X, fit_labels, present_count, config.lda_ridge);
    if (verbose) std::fprintf(stderr, "train: LDA fitted, reduced dim %d\n", present_count - 1);

    TrainingIndex& index = bundle.index;
    index.image_count = n_images;
    index.label_count = label_count;
    index.per_image_counts.assign(n_images, 0);
    index.global_label_counts.assign(label_count, 0);
    index.T.resize(bundle.lda.W.rows(), static_cast<Eigen::Index>(flat_labels.size()));
    for (size_t i = 0; i < flat_labels.size(); ++i) {
        index.T.col(i) = bundle.lda.project(*flat_features[i]);
        index.image_of.push_back(flat_image[i]);
        index.labels.push_back(flat_labels[i]);
        ++index.per_image_counts[flat_image[i]];
        ++index.global_label_counts[flat_labels[i]];
    }
    index.validate();

    // Leave-one-out accuracy rows need each image's full reduced features.
    std::vector<TrainingImageData> loo_data(n_images);
    parallel_for(n_images, [&](int i) {
        loo_data[i].map = raw[i].map;
        loo_data[i].mask = raw[i].mask;
        loo_data[i].reduced.reserve(raw[i].features.size());
        for (const auto& f : raw[i].features) loo_data[i].reduced.push_back(bundle.lda.project(f));
    });

    AccuracyTableOptions acc_opts;
    acc_opts.k_m = config.k_m;
    acc_opts.tau = config.tau;
    acc_opts.epsilon = config.epsilon;
    acc_opts.k_max = config.k_max;
    acc_opts.max_images = config.loo_max_images;
    if (verbose)
        acc_opts.progress = [](int done, int total) {
            std::fprintf(stderr, "\rtrain: accuracy table %d/%d", done, total);
            if (done == total) std::fprintf(stderr, "\n");
        };
    bundle.accuracy = build_accuracy_table(loo_data, index, acc_opts);

    std::vector<LabelMask> masks;
    masks.reserve(n_images);
    for (auto& r : raw) masks.push_back(std::move(r.mask));
    bundle.cooccurrence = build_cooccurrence(masks, label_count, config.cooc_smoothing);
    return bundle;
}

ParseResult parse_image(const Image& image, const ModelBundle& bundle, const ParseFlags& flags) {
    const Config& config = bundle.config;
    PreparedImage prepared = prepare_image(image, bundle.lda, config);
    const int n_sp = prepared.map.count();

    ParseResult result;
    result.retrieval =
        build_retrieval_set(prepared.reduced, bundle.index, config.k_m, config.tau);
    if (!flags.dump_retrieval.empty()) dump_retrieval_csv(flags.dump_retrieval, result.retrieval);

    result.k_star = flags.fixed_k ? *flags.fixed_k
                                  : select_adaptive_k(result.retrieval, bundle.accuracy,
                                                      config.fallback_k);
    if (result.k_star < 1) throw InvalidInput("parse: k must be >= 1");

    auto allowed = result.retrieval.allowed_mask(bundle.index.image_count);
    KnnFilter filter{-1, &allowed};
    std::vector<std::vector<Neighbor>> neighbors(n_sp);
    parallel_for(n_sp, [&](int i) {
        neighbors[i] = knn_superpixels(prepared.reduced[i], bundle.index, result.k_star, filter);
    });

    LabelLikelihoodField field =
        build_likelihood_field(neighbors, result.k_star, bundle.index, config.epsilon);

    // Initial labels: argmax of the likelihood field per super-pixel.
    std::vector<int> initial(static_cast<size_t>(image.width()) * image.height(), 0);
    result.initial_labels = LabelMask(image.width(), image.height());
    for (const Segment& seg : prepared.map.segments) {
        Eigen::Index best;
        field.likelihoods.row(seg.id).maxCoeff(&best);
        for (int p : seg.pixels) {
            initial[p] = static_cast<int>(best);
            result.initial_labels.data()[p] = static_cast<uint8_t>(best);
        }
    }

    double lambda = flags.lambda ? *flags.lambda : config.lambda;
    MrfProblem problem =
        make_mrf_problem(data_term(field, prepared.map), gradient_edges(image),
                         bundle.cooccurrence, lambda, config.probability_floor);
    SwapResult swap = alpha_beta_swap(problem, initial);
    if (!flags.trace_energy.empty()) dump_energy_csv(flags.trace_energy, swap.energy_trace);

    result.labels = LabelMask(image.width(), image.height());
    for (size_t p = 0; p < swap.labeling.size(); ++p)
        result.labels.data()[p] = static_cast<uint8_t>(swap.labeling[p]);
    result.final_energy = swap.energy;
    result.energy_trace = std::move(swap.energy_trace);
    return result;
}

EvaluateResult evaluate(const DatasetManifest& manifest, const ModelBundle& bundle,
                        const ParseFlags& flags, bool verbose) {
    if (manifest.test.empty()) throw UndefinedMetric("evaluate: empty test split");
    const int n = static_cast<int>(manifest.test.size());
    std::vector<LabelMask> preds(n), gts(n);
    std::vector<char> ok(n, 0);

    parallel_for(n, [&](int i) {
        const auto& pair = manifest.test[i];
        try {
            Image image = load_image(manifest.resolve(pair.image));
            gts[i] = load_mask(manifest.resolve(pair.mask));
            preds[i] = parse_image(image, bundle, flags).labels;
            ok[i] = 1;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "evaluate: skipping %s: %s\n", pair.image.c_str(), e.what());
        }
    });

    EvaluateResult result;
    std::vector<LabelMask> kept_preds, kept_gts;
    for (int i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        result.image_names.push_back(manifest.test[i].image);
        result.per_image_rates.push_back(
            compute_report({preds[i]}, {gts[i]}, static_cast<int>(manifest.label_names.size()))
                .per_pixel);
        kept_preds.push_back(std::move(preds[i]));
        kept_gts.push_back(std::move(gts[i]));
    }
    if (kept_preds.empty()) throw UndefinedMetric("evaluate: no test image could be parsed");
    result.report =
        compute_report(kept_preds, kept_gts, static_cast<int>(manifest.label_names.size()));
    if (verbose)
        std::fprintf(stderr, "evaluate: per-pixel %.4f per-category %.4f\n",
                     result.report.per_pixel, result.report.per_category);
    return result;
}

GridSearchResult grid_search(const DatasetManifest& manifest, const Config& config,
                             std::vector<double> tau_grid, std::vector<int> km_grid,
                             bool verbose) {
    if (tau_grid.empty()) tau_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
    if (km_grid.empty()) km_grid = {500, 1000, 1500, 2000, 2500};
    if (tau_grid.empty() || km_grid.empty()) throw InvalidInput("grid_search: empty grid");

    // Segment/describe/fit once; only tau and k_m vary across grid points.
    ModelBundle probe;  // train() with the accuracy table skipped
    {
        Config fast = config;
        fast.loo_max_images = 0;  // skip accuracy rows; table rebuilt per grid point
        probe = train(manifest, fast, verbose);
    }

    const int n_images = static_cast<int>(manifest.train.size());
    std::vector<TrainingImageData> loo_data(n_images);
    parallel_for(n_images, [&](int i) {
        const auto& pair = manifest.train[i];
        Image image = load_image(manifest.resolve(pair.image));
        loo_data[i].mask = load_mask(manifest.resolve(pair.mask));
        loo_data[i].map = oversegment(image, config.segment);
        auto features = extract(image, loo_data[i].map, config.registry);
        for (const auto& f : features) loo_data[i].reduced.push_back(probe.lda.project(f));
    });

    GridSearchResult result;
    for (double tau : tau_grid) {
        for (int k_m : km_grid) {
            AccuracyTableOptions opts;
            opts.k_m = k_m;
            opts.tau = tau;
            opts.epsilon = config.epsilon;
            opts.k_max = config.k_max;
            opts.max_images = config.loo_max_images;
            AccuracyTable table = build_accuracy_table(loo_data, probe.index, opts);

            // Score: mean leave-one-out accuracy at each image's adaptive k.
            double sum = 0.0;
            int counted = 0;
            int row_count = static_cast<int>(loo_data.size());
            if (opts.max_images > 0) row_count = std::min(row_count, opts.max_images);
            for (int t = 0; t < row_count; ++t) {
                if (!table.valid[t]) continue;
                RetrievalSet rset;
                try {
                    rset = build_retrieval_set(loo_data[t].reduced, probe.index, k_m, tau,
                                               KnnFilter{t, nullptr});
                } catch (const DegenerateRetrieval&) {
                    continue;
                }
                int k_star = select_adaptive_k(rset, table, config.fallback_k);
                sum += table.A(t, k_star - 1);
                ++counted;
            }
            double score = counted > 0 ? sum / counted : 0.0;
            result.table.push_back({tau, k_m, score});
            if (verbose)
                std::fprintf(stderr, "grid_search: tau=%.2f k_m=%d score=%.4f\n", tau, k_m, score);
        }
    }
    // argmax with ties to smaller k_m, then smaller tau.
    const GridPoint* best = nullptr;
    for (const auto& point : result.table) {
        if (!best || point.score > best->score ||
            (point.score == best->score &&
             (point.k_m < best->k_m || (point.k_m == best->k_m && point.tau < best->tau))))
            best = &point;
    }
    result.best_tau = best->tau;
    result.best_k_m = best->k_m;
    return result;
}

void gen_synth(uint64_t seed, int n_images, const std::string& out_dir,
               const SynthParams& params) {
    if (n_images < 4) throw InvalidInput("gen_synth: need at least 4 images");
    fs::path root(out_dir);
    fs::create_directories(root / "images");
    fs::create_directories(root / "masks");

    std::mt19937 rng(static_cast<uint32_t>(seed));
    const int w = params.width, h = params.height;

    json manifest;
    manifest["labels"] = "labels.txt";
    json train = json::array(), test = json::array();

    for (int i = 0; i < n_images; ++i) {
        Image image(w, h);
        LabelMask mask(w, h);

        // Sky: blue-ish vertical gradient over the top band.
        std::uniform_int_distribution<int> horizon_dist(h * 2 / 5, h * 3 / 5);
        int horizon = horizon_dist(rng);
        std::uniform_int_distribution<int> sky_base(150, 200);
        int sky_blue = sky_base(rng);
        for (int y = 0; y < horizon; ++y)
            for (int x = 0; x < w; ++x) {
                int fade = y * 40 / std::max(horizon, 1);
                image.at(x, y, 0) = static_cast<uint8_t>(90 + fade / 2);
                image.at(x, y, 1) = static_cast<uint8_t>(140 + fade / 2);
                image.at(x, y, 2) = static_cast<uint8_t>(sky_blue + fade / 4);
                mask.at(x, y) = 0;
            }

        // Ground: textured green band.
        std::uniform_int_distribution<int> noise(-18, 18);
        for (int y = horizon; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int n = noise(rng);
                image.at(x, y, 0) = static_cast<uint8_t>(std::clamp(70 + n, 0, 255));
                image.at(x, y, 1) = static_cast<uint8_t>(std::clamp(120 + n, 0, 255));
                image.at(x, y, 2) = static_cast<uint8_t>(std::clamp(55 + n / 2, 0, 255));
                mask.at(x, y) = 1;
            }

        // Objects: label 2 = red boxes, label 3 = yellow boxes.
        std::uniform_int_distribution<int> count_dist(1, std::max(params.max_objects, 1));
        int objects = count_dist(rng);
        for (int o = 0; o < objects; ++o) {
            std::uniform_int_distribution<int> class_dist(2, 3);
            int cls = class_dist(rng);
            std::uniform_int_distribution<int> ow(w / 6, w / 3), oh(h / 6, h / 3);
            int bw = ow(rng), bh = oh(rng);
            std::uniform_int_distribution<int> ox(0, std::max(w - bw - 1, 1));
            std::uniform_int_distribution<int> oy(0, std::max(h - bh - 1, 1));
            int x0 = ox(rng), y0 = oy(rng);
            std::uniform_int_distribution<int> jitter(-12, 12);
            int jr = jitter(rng), jg = jitter(rng);
            for (int y = y0; y < y0 + bh && y < h; ++y)
                for (int x = x0; x < x0 + bw && x < w; ++x) {
                    if (cls == 2) {
                        image.at(x, y, 0) = static_cast<uint8_t>(std::clamp(200 + jr, 0, 255));
                        image.at(x, y, 1) = static_cast<uint8_t>(std::clamp(50 + jg, 0, 255));
                        image.at(x, y, 2) = 60;
                    } else {
                        image.at(x, y, 0) = static_cast<uint8_t>(std::clamp(220 + jr, 0, 255));
                        image.at(x, y, 1) = static_cast<uint8_t>(std::clamp(200 + jg, 0, 255));
                        image.at(x, y, 2) = 40;
                    }
                    mask.at(x, y) = static_cast<uint8_t>(cls);
                }
        }

        char name[32];
        std::snprintf(name, sizeof(name), "scene_%03d", i);
        std::string img_rel = std::string("images/") + name + ".png";
        std::string mask_rel = std::string("masks/") + name + ".png";
        save_png(image, (root / img_rel).string());
        save_mask(mask, (root / mask_rel).string());

        json entry = {{"image", img_rel}, {"mask", mask_rel}};
        if (i < n_images - params.test_count)
            train.push_back(entry);
        else
            test.push_back(entry);
    }
    manifest["train"] = train;
    manifest["test"] = test;

    std::ofstream labels(root / "labels.txt");
    labels << "sky\nground\nobject_red\nobject_yellow\n";
    std::ofstream out(root / "manifest.json");
    out << manifest.dump(2) << "\n";
}

}  // namespace sceneparse
