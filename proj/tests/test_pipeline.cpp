#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sceneparse/pipeline.hpp"

using namespace sceneparse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("sceneparse_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small, fast training configuration for the synthetic fixtures.
Config mini_config() {
    Config config;
    config.segment.scale = 60.0;
    config.segment.min_size = 24;
    config.k_m = 200;
    config.k_max = 10;
    return config;
}

}  // namespace

TEST_CASE("config JSON round-trips every field") {
    Config config;
    config.k_m = 123;
    config.tau = 0.45;
    config.lambda = 3.5;
    config.epsilon = 0.5;
    config.k_max = 17;
    config.fallback_k = 9;
    config.loo_max_images = 6;
    config.segment.scale = 42.0;
    config.segment.sigma = 1.1;
    config.segment.min_size = 77;
    config.registry = FeatureRegistry::full_table();

    Config back = Config::from_json(config.to_json());
    CHECK(back.k_m == 123);
    CHECK(back.tau == doctest::Approx(0.45));
    CHECK(back.lambda == doctest::Approx(3.5));
    CHECK(back.epsilon == doctest::Approx(0.5));
    CHECK(back.k_max == 17);
    CHECK(back.fallback_k == 9);
    CHECK(back.loo_max_images == 6);
    CHECK(back.segment.scale == doctest::Approx(42.0));
    CHECK(back.segment.sigma == doctest::Approx(1.1));
    CHECK(back.segment.min_size == 77);
    CHECK(back.registry.total_dim() == config.registry.total_dim());
    CHECK(back.registry.enabled == config.registry.enabled);
}

TEST_CASE("synthetic generator is deterministic per seed") {
    TempDir a("synth_a"), b("synth_b"), c("synth_c");
    SynthParams params;
    params.width = 32;
    params.height = 32;
    params.test_count = 2;
    gen_synth(11, 6, a.str(), params);
    gen_synth(11, 6, b.str(), params);
    gen_synth(12, 6, c.str(), params);

    auto manifest = DatasetManifest::load(a.str());
    CHECK(manifest.train.size() == 4);
    CHECK(manifest.test.size() == 2);
    CHECK(manifest.label_names.size() == 4);

    bool any_diff = false;
    for (const auto& entry : fs::recursive_directory_iterator(a.path)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), a.path);
        CHECK(slurp(entry.path()) == slurp(b.path / rel));
        if (slurp(entry.path()) != slurp(c.path / rel)) any_diff = true;
    }
    CHECK(any_diff);  // different seed, different content

    // Masks cover every pixel with a valid label.
    for (const auto& pair : manifest.train) {
        auto mask = load_mask(manifest.resolve(pair.mask));
        for (uint8_t v : mask.data()) CHECK(v < 4);
    }
}

TEST_CASE("manifest loading validates file references") {
    TempDir dir("manifest_bad");
    std::ofstream(dir.path / "manifest.json")
        << R"({"train": [{"image": "missing.png", "mask": "missing_mask.png"}], "test": []})";
    std::ofstream(dir.path / "labels.txt") << "sky\nground\n";
    CHECK_THROWS_AS(DatasetManifest::load(dir.str()), IoError);
}

TEST_CASE("end-to-end train, save, load, parse round trip") {
    TempDir data("roundtrip_data"), bundle_dir("roundtrip_bundle");
    SynthParams params;
    params.width = 32;
    params.height = 32;
    params.test_count = 2;
    gen_synth(3, 10, data.str(), params);
    auto manifest = DatasetManifest::load(data.str());

    auto bundle = train(manifest, mini_config());
    CHECK(bundle.index.size() > 0);
    CHECK(bundle.lda.W.rows() == bundle.index.label_count - 1);
    CHECK(bundle.accuracy.A.rows() == static_cast<int>(manifest.train.size()));
    bundle.index.validate();

    bundle.save(bundle_dir.str());
    auto loaded = ModelBundle::load(bundle_dir.str());
    CHECK(loaded.index.size() == bundle.index.size());
    CHECK((loaded.lda.W - bundle.lda.W).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((loaded.accuracy.A - bundle.accuracy.A).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((loaded.cooccurrence.P - bundle.cooccurrence.P).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    CHECK(loaded.label_names == bundle.label_names);

    auto image = load_image(manifest.resolve(manifest.test[0].image));
    auto r1 = parse_image(image, bundle);
    auto r2 = parse_image(image, loaded);
    CHECK(r1.labels.data() == r2.labels.data());
    CHECK(r1.initial_labels.data() == r2.initial_labels.data());
    CHECK(r1.k_star == r2.k_star);
    CHECK(r1.k_star >= 1);

    // lambda = 0 disables the smoothing term entirely.
    ParseFlags no_smooth;
    no_smooth.lambda = 0.0;
    auto flat = parse_image(image, bundle, no_smooth);
    CHECK(flat.labels.data() == flat.initial_labels.data());

    // fixed-k flag bypasses the adaptive rule.
    ParseFlags fixed;
    fixed.fixed_k = 3;
    CHECK(parse_image(image, bundle, fixed).k_star == 3);
}

TEST_CASE("evaluate produces a coherent report on the synthetic test split") {
    TempDir data("eval_data");
    SynthParams params;
    params.width = 32;
    params.height = 32;
    params.test_count = 2;
    gen_synth(5, 10, data.str(), params);
    auto manifest = DatasetManifest::load(data.str());
    auto bundle = train(manifest, mini_config());

    auto result = evaluate(manifest, bundle);
    CHECK(result.report.per_pixel >= 0.0);
    CHECK(result.report.per_pixel <= 1.0);
    CHECK(result.per_image_rates.size() == manifest.test.size());
    CHECK(result.image_names.size() == manifest.test.size());

    DatasetManifest empty = manifest;
    empty.test.clear();
    CHECK_THROWS_AS(evaluate(empty, bundle), UndefinedMetric);
}

TEST_CASE("grid search covers the grid and returns its argmax") {
    TempDir data("grid_data");
    SynthParams params;
    params.width = 32;
    params.height = 32;
    params.test_count = 2;
    gen_synth(9, 8, data.str(), params);
    auto manifest = DatasetManifest::load(data.str());

    Config config = mini_config();
    auto result = grid_search(manifest, config, {0.2, 0.4}, {50, 100});
    CHECK(result.table.size() == 4);

    double best = -1.0;
    for (const auto& point : result.table) {
        CHECK(point.score >= 0.0);
        CHECK(point.score <= 1.0);
        best = std::max(best, point.score);
    }
    bool found = false;
    for (const auto& point : result.table)
        if (point.tau == result.best_tau && point.k_m == result.best_k_m) {
            found = true;
            CHECK(point.score == doctest::Approx(best));
        }
    CHECK(found);
}

TEST_CASE("training rejects datasets with fewer than two labels") {
    TempDir dir("single_label");
    fs::create_directories(dir.path / "images");
    fs::create_directories(dir.path / "masks");
    for (int i = 0; i < 2; ++i) {
        Image img(16, 16);
        for (auto& v : img.data()) v = static_cast<uint8_t>(100 + i);
        save_png(img, (dir.path / "images" / ("im" + std::to_string(i) + ".png")).string());
        LabelMask mask(16, 16, 0);
        save_mask(mask, (dir.path / "masks" / ("im" + std::to_string(i) + ".png")).string());
    }
    std::ofstream(dir.path / "labels.txt") << "only\n";
    std::ofstream(dir.path / "manifest.json") << R"({"train": [
        {"image": "images/im0.png", "mask": "masks/im0.png"},
        {"image": "images/im1.png", "mask": "masks/im1.png"}], "test": []})";
    auto manifest = DatasetManifest::load(dir.str());
    CHECK_THROWS_AS(train(manifest, mini_config()), InvalidInput);
}
