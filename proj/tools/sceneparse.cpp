// Command-line front end: train, parse, eval, gridsearch, gen-synth.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "sceneparse/pipeline.hpp"

using json = nlohmann::json;
using namespace sceneparse;

namespace {

Config load_config_or_default(const std::string& path) {
    if (path.empty()) return Config{};
    return Config::load(path);
}

void write_report(const EvaluateResult& result, const std::vector<std::string>& label_names,
                  const std::string& json_path, const std::string& csv_path) {
    json j;
    j["per_pixel"] = result.report.per_pixel;
    j["per_category"] = result.report.per_category;
    j["labeled_pixels"] = result.report.labeled_pixels;
    j["void_pixels"] = result.report.void_pixels;
    json cats = json::object();
    for (size_t l = 0; l < label_names.size(); ++l)
        if (result.report.category_rates[l] >= 0)
            cats[label_names[l]] = result.report.category_rates[l];
    j["category_rates"] = cats;
    json per_image = json::array();
    for (size_t i = 0; i < result.image_names.size(); ++i)
        per_image.push_back({{"image", result.image_names[i]},
                             {"per_pixel", result.per_image_rates[i]}});
    j["per_image"] = per_image;

    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << j.dump(2) << "\n";
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        out << "label,rate\n";
        for (size_t l = 0; l < label_names.size(); ++l)
            if (result.report.category_rates[l] >= 0)
                out << label_names[l] << "," << result.report.category_rates[l] << "\n";
    }

    std::printf("%-20s %8s\n", "metric", "value");
    std::printf("%-20s %8.4f\n", "per_pixel", result.report.per_pixel);
    std::printf("%-20s %8.4f\n", "per_category", result.report.per_category);
    for (size_t l = 0; l < label_names.size(); ++l)
        if (result.report.category_rates[l] >= 0)
            std::printf("%-20s %8.4f\n", label_names[l].c_str(),
                        result.report.category_rates[l]);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric scene parser"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "Build a model bundle from a dataset");
    std::string train_data, train_out, train_config;
    train_cmd->add_option("--data", train_data, "dataset directory")->required();
    train_cmd->add_option("--out", train_out, "output bundle directory")->required();
    train_cmd->add_option("--config", train_config, "config JSON file");

    // parse
    auto* parse_cmd = app.add_subcommand("parse", "Label one image with a trained bundle");
    std::string parse_model, parse_image_path, parse_out, parse_dump, parse_trace, parse_color;
    int parse_fixed_k = -1;
    double parse_lambda = -1.0;
    parse_cmd->add_option("--model", parse_model, "bundle directory")->required();
    parse_cmd->add_option("--image", parse_image_path, "input image")->required();
    parse_cmd->add_option("--out", parse_out, "output label mask PNG")->required();
    parse_cmd->add_option("--fixed-k", parse_fixed_k, "bypass adaptive k");
    parse_cmd->add_option("--lambda", parse_lambda, "smoothing constant override");
    parse_cmd->add_option("--dump-retrieval", parse_dump, "write ranked retrieval CSV");
    parse_cmd->add_option("--trace-energy", parse_trace, "write accepted-move energy CSV");
    parse_cmd->add_option("--colorized", parse_color, "also write a colorized PNG");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a bundle on the test split");
    std::string eval_model, eval_data, eval_report, eval_csv;
    double eval_lambda = -1.0;
    int eval_fixed_k = -1;
    eval_cmd->add_option("--model", eval_model, "bundle directory")->required();
    eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
    eval_cmd->add_option("--report", eval_report, "output report JSON");
    eval_cmd->add_option("--category-csv", eval_csv, "per-category CSV");
    eval_cmd->add_option("--fixed-k", eval_fixed_k, "bypass adaptive k");
    eval_cmd->add_option("--lambda", eval_lambda, "smoothing constant override");

    // gridsearch
    auto* grid_cmd = app.add_subcommand("gridsearch", "Search tau and k_m by leave-one-out");
    std::string grid_data, grid_config, grid_out;
    std::vector<double> grid_tau;
    std::vector<int> grid_km;
    grid_cmd->add_option("--data", grid_data, "dataset directory")->required();
    grid_cmd->add_option("--config", grid_config, "config JSON file");
    grid_cmd->add_option("--tau-grid", grid_tau, "tau values (default 0.1..0.5)");
    grid_cmd->add_option("--km-grid", grid_km, "k_m values (default 500..2500)");
    grid_cmd->add_option("--out", grid_out, "score table CSV");

    // gen-synth
    auto* synth_cmd = app.add_subcommand("gen-synth", "Generate a synthetic dataset");
    std::string synth_out;
    uint64_t synth_seed = 7;
    int synth_count = 24, synth_size = 64, synth_test = 4;
    synth_cmd->add_option("--seed", synth_seed, "RNG seed");
    synth_cmd->add_option("--count", synth_count, "number of images")->required();
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--size", synth_size, "image side length");
    synth_cmd->add_option("--test-count", synth_test, "images reserved for the test split");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            auto manifest = DatasetManifest::load(train_data);
            auto bundle = train(manifest, load_config_or_default(train_config), true);
            bundle.save(train_out);
            std::printf("bundle written to %s (%d training images, %d labels)\n",
                        train_out.c_str(), bundle.index.image_count, bundle.index.label_count);
        } else if (*parse_cmd) {
            auto bundle = ModelBundle::load(parse_model);
            Image image = load_image(parse_image_path);
            ParseFlags flags;
            if (parse_fixed_k > 0) flags.fixed_k = parse_fixed_k;
            if (parse_lambda >= 0) flags.lambda = parse_lambda;
            flags.dump_retrieval = parse_dump;
            flags.trace_energy = parse_trace;
            auto result = parse_image(image, bundle, flags);
            save_mask(result.labels, parse_out);
            if (!parse_color.empty()) {
                Image colors(image.width(), image.height());
                for (int y = 0; y < image.height(); ++y)
                    for (int x = 0; x < image.width(); ++x) {
                        uint32_t hash = (result.labels.at(x, y) + 1u) * 2654435761u;
                        colors.at(x, y, 0) = static_cast<uint8_t>(hash >> 16);
                        colors.at(x, y, 1) = static_cast<uint8_t>(hash >> 8);
                        colors.at(x, y, 2) = static_cast<uint8_t>(hash);
                    }
                save_png(colors, parse_color);
            }
            std::printf("parsed with k*=%d, k_r=%d, final energy %.6f -> %s\n", result.k_star,
                        result.retrieval.k_r, result.final_energy, parse_out.c_str());
        } else if (*eval_cmd) {
            auto bundle = ModelBundle::load(eval_model);
            auto manifest = DatasetManifest::load(eval_data);
            ParseFlags flags;
            if (eval_fixed_k > 0) flags.fixed_k = eval_fixed_k;
            if (eval_lambda >= 0) flags.lambda = eval_lambda;
            auto result = evaluate(manifest, bundle, flags, true);
            write_report(result, manifest.label_names, eval_report, eval_csv);
        } else if (*grid_cmd) {
            auto manifest = DatasetManifest::load(grid_data);
            auto result =
                grid_search(manifest, load_config_or_default(grid_config), grid_tau, grid_km, true);
            std::printf("best tau=%.2f k_m=%d\n", result.best_tau, result.best_k_m);
            if (!grid_out.empty()) {
                std::ofstream out(grid_out);
                out << "tau,k_m,score\n";
                for (const auto& p : result.table)
                    out << p.tau << "," << p.k_m << "," << p.score << "\n";
            }
        } else if (*synth_cmd) {
            SynthParams params;
            params.width = synth_size;
            params.height = synth_size;
            params.test_count = synth_test;
            gen_synth(synth_seed, synth_count, synth_out, params);
            std::printf("synthetic dataset written to %s\n", synth_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
