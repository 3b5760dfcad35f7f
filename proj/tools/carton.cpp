// Command-line front end: synthesize scenes, infer box models, train weights,
// evaluate on a dataset, generate closing plans, export wireframe figures.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carton/carton.hpp"

namespace fs = std::filesystem;

namespace {

carton::AppConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return carton::AppConfig{};
    return carton::load_app_config(path);
}

struct ScenePair {
    std::string name;
    std::string cloud_path;
    std::string labels_path;
};

// Pairs scene_XXX.pcd (or .csv) with scene_XXX_labels.json, sorted by name.
std::vector<ScenePair> discover_scenes(const std::string& dir) {
    if (!fs::is_directory(dir)) throw carton::Error("\"" + dir + "\" is not a directory");
    const std::string suffix = "_labels.json";
    std::vector<ScenePair> scenes;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() <= suffix.size() ||
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        const std::string stem = name.substr(0, name.size() - suffix.size());
        for (const char* ext : {".pcd", ".csv"}) {
            fs::path cloud = entry.path().parent_path() / (stem + ext);
            if (fs::exists(cloud)) {
                scenes.push_back({stem, cloud.string(), entry.path().string()});
                break;
            }
        }
    }
    std::sort(scenes.begin(), scenes.end(),
              [](const ScenePair& a, const ScenePair& b) { return a.name < b.name; });
    if (scenes.empty())
        throw carton::Error("no scene pairs (*.pcd + *_labels.json) found in \"" + dir + "\"");
    return scenes;
}

int run_synth(const std::string& config_path, const std::string& spec_path,
              const std::string& out_dir, std::uint64_t seed, std::size_t count_override) {
    carton::AppConfig cfg = load_config_or_default(config_path);
    fs::create_directories(out_dir);

    if (!spec_path.empty()) {
        const carton::BoxSpec spec = carton::box_spec_from_json(carton::load_json(spec_path));
        auto [cloud, labels] = carton::synth_box(spec, seed);
        const std::string cloud_path = (fs::path(out_dir) / "cloud.pcd").string();
        const std::string labels_path = (fs::path(out_dir) / "labels.json").string();
        carton::save_cloud(cloud_path, cloud);
        carton::save_json(labels_path, carton::labels_to_json(labels));
        std::cout << "wrote " << cloud_path << " (" << cloud.size() << " points) and "
                  << labels_path << "\n";
        return 0;
    }

    carton::ScenarioConfig scenario = cfg.scenario;
    if (count_override > 0) scenario.count = count_override;
    scenario.validate();
    carton::Json manifest;
    manifest["seed"] = seed;
    manifest["count"] = scenario.count;
    manifest["scenes"] = carton::Json::array();
    for (std::size_t i = 0; i < scenario.count; ++i) {
        const std::uint64_t scene_seed = carton::splitmix64(seed ^ carton::splitmix64(i + 0x5eed));
        carton::SyntheticScene scene = carton::make_scene(scenario, scene_seed);
        char stem[32];
        std::snprintf(stem, sizeof stem, "scene_%03zu", i);
        const std::string cloud_path = (fs::path(out_dir) / (std::string(stem) + ".pcd")).string();
        const std::string labels_path =
            (fs::path(out_dir) / (std::string(stem) + "_labels.json")).string();
        carton::save_cloud(cloud_path, scene.cloud);
        carton::save_json(labels_path, carton::labels_to_json(scene.labels));
        manifest["scenes"].push_back(carton::Json{{"name", stem},
                                                  {"seed", scene_seed},
                                                  {"points", scene.cloud.size()},
                                                  {"spec", carton::box_spec_to_json(scene.spec)}});
    }
    carton::save_json((fs::path(out_dir) / "manifest.json").string(), manifest);
    std::cout << "wrote " << scenario.count << " scenes to " << out_dir << "\n";
    return 0;
}

int run_infer(const std::string& config_path, const std::string& cloud_path,
              const std::string& weights_path, const std::string& format,
              const std::string& out_path, std::int64_t seed) {
    carton::AppConfig cfg = load_config_or_default(config_path);
    if (seed >= 0) cfg.pipeline.segmentation.seed = static_cast<std::uint64_t>(seed);
    const carton::PointCloud cloud = carton::load_cloud(cloud_path);
    const carton::WeightVector weights =
        carton::weights_from_document(carton::load_json(weights_path));

    carton::PipelineResult result = carton::run_pipeline(cloud, weights, cfg.pipeline);
    const carton::Json doc = carton::result_to_json(result.inference, result.segments);
    if (format == "structured")
        std::cout << doc.dump(2) << "\n";
    else
        std::cout << carton::result_to_text(result.inference, result.segments);
    if (!out_path.empty()) carton::save_json(out_path, doc);
    return 0;
}

int run_train(const std::string& config_path, const std::string& scenes_dir,
              const std::string& out_path, std::uint64_t seed) {
    carton::AppConfig cfg = load_config_or_default(config_path);
    cfg.perturbation.seed = seed;

    std::vector<carton::TrainingScene> scenes;
    std::vector<std::string> names;
    for (const ScenePair& pair : discover_scenes(scenes_dir)) {
        const carton::PointCloud cloud = carton::load_cloud(pair.cloud_path);
        const carton::GroundTruthLabels labels =
            carton::labels_from_json(carton::load_json(pair.labels_path));
        try {
            carton::ScenePrep prep = carton::prepare_scene(cloud, cfg.pipeline);
            scenes.push_back({std::move(prep.segments), labels});
            names.push_back(pair.name);
        } catch (const carton::Error& e) {
            std::cerr << "warning: skipping " << pair.name << ": " << e.what() << "\n";
        }
    }

    std::vector<std::size_t> skipped;
    const std::vector<carton::TrainingExample> examples = carton::make_training_set(
        scenes, carton::box_template(true), cfg.pipeline.features, cfg.perturbation,
        cfg.thresholds, &skipped);
    for (std::size_t idx : skipped)
        std::cerr << "warning: labels unmatched in " << names[idx] << ", scene skipped\n";

    const carton::LearnedModel model = carton::fit_standardized(examples, cfg.ridge);
    if (model.rank_warning)
        std::cerr << "warning: rank-deficient training features; minimum-norm solution\n";
    carton::save_json(out_path, carton::learned_model_to_json(model));
    std::cout << "trained on " << (scenes.size() - skipped.size()) << " scenes ("
              << examples.size() << " examples), weights written to " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& config_path, const std::string& scenes_dir,
             const std::string& weights_path, const std::string& format,
             const std::string& out_path) {
    carton::AppConfig cfg = load_config_or_default(config_path);
    const carton::WeightVector weights =
        carton::weights_from_document(carton::load_json(weights_path));

    std::vector<carton::BenchmarkScene> dataset;
    for (const ScenePair& pair : discover_scenes(scenes_dir)) {
        carton::BenchmarkScene scene;
        scene.cloud = carton::load_cloud(pair.cloud_path);
        scene.labels = carton::labels_from_json(carton::load_json(pair.labels_path));
        scene.name = pair.name;
        dataset.push_back(std::move(scene));
    }

    const carton::EvalReport report =
        carton::run_benchmark(dataset, weights, cfg.pipeline, cfg.thresholds);
    if (format == "structured")
        std::cout << carton::report_to_json(report).dump(2) << "\n";
    else
        std::cout << carton::report_to_text(report);
    if (!out_path.empty()) carton::save_json(out_path, carton::report_to_json(report));
    return 0;
}

int run_plan(const std::string& config_path, const std::string& model_path,
             const std::string& format, const std::string& out_path) {
    carton::AppConfig cfg = load_config_or_default(config_path);
    const carton::ModelDocument doc = carton::model_from_json(carton::load_json(model_path));
    const carton::ClosingPlan plan =
        carton::make_closing_plan(doc.assignment, doc.segments, cfg.planner);
    if (format == "structured")
        std::cout << carton::plan_to_json(plan).dump(2) << "\n";
    else
        std::cout << carton::plan_to_text(plan);
    if (!out_path.empty()) carton::save_json(out_path, carton::plan_to_json(plan));
    return 0;
}

int run_export_wireframe(const std::string& model_path, const std::string& out_path) {
    const carton::ModelDocument doc = carton::model_from_json(carton::load_json(model_path));
    const std::string svg = carton::wireframe_svg(doc.segments, doc.assignment);
    carton::save_text(out_path, svg);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"box model inference from point clouds"};
    app.require_subcommand(1);

    std::string config_path, spec_path, out_path, cloud_path, weights_path, scenes_dir, model_path;
    std::string format = "text";
    std::uint64_t seed = 0;
    std::int64_t seed_override = -1;
    std::size_t count = 0;
    int rc = 0;

    auto* synth = app.add_subcommand("synth", "generate synthetic box scenes");
    synth->add_option("--config", config_path, "config file (JSON)");
    synth->add_option("--spec", spec_path, "box spec file (JSON); omit to use scenario config");
    synth->add_option("--out", out_path, "output directory")->required();
    synth->add_option("--seed", seed, "random seed")->required();
    synth->add_option("--count", count, "number of scenes (scenario mode)");
    synth->callback([&] { rc = run_synth(config_path, spec_path, out_path, seed, count); });

    auto* infer = app.add_subcommand("infer", "infer a box model from a cloud");
    infer->add_option("--config", config_path, "config file (JSON)");
    infer->add_option("--cloud", cloud_path, "input cloud (.pcd or .csv)")->required();
    infer->add_option("--weights", weights_path, "weights file (JSON)")->required();
    infer->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "structured"}));
    infer->add_option("--out", out_path, "also write the structured document here");
    infer->add_option("--seed", seed_override, "override the segmentation seed");
    infer->callback([&] {
        rc = run_infer(config_path, cloud_path, weights_path, format, out_path, seed_override);
    });

    auto* train = app.add_subcommand("train", "fit scoring weights from labeled scenes");
    train->add_option("--config", config_path, "config file (JSON)");
    train->add_option("--scenes", scenes_dir, "directory of scene/label pairs")->required();
    train->add_option("--out", out_path, "output weights file (JSON)")->required();
    train->add_option("--seed", seed, "perturbation sampling seed")->required();
    train->callback([&] { rc = run_train(config_path, scenes_dir, out_path, seed); });

    auto* eval = app.add_subcommand("eval", "benchmark weights on labeled scenes");
    eval->add_option("--config", config_path, "config file (JSON)");
    eval->add_option("--scenes", scenes_dir, "directory of scene/label pairs")->required();
    eval->add_option("--weights", weights_path, "weights file (JSON)")->required();
    eval->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "structured"}));
    eval->add_option("--out", out_path, "also write the JSON report here");
    eval->callback(
        [&] { rc = run_eval(config_path, scenes_dir, weights_path, format, out_path); });

    auto* plan = app.add_subcommand("plan", "flap-closing plan from an inferred model");
    plan->add_option("--config", config_path, "config file (JSON)");
    plan->add_option("--model", model_path, "model document from infer --out")->required();
    plan->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "structured"}));
    plan->add_option("--out", out_path, "also write the JSON plan here");
    plan->callback([&] { rc = run_plan(config_path, model_path, format, out_path); });

    auto* wire = app.add_subcommand("export-wireframe", "SVG wireframe of an inferred model");
    wire->add_option("--model", model_path, "model document from infer --out")->required();
    wire->add_option("--out", out_path, "output SVG path")->required();
    wire->callback([&] { rc = run_export_wireframe(model_path, out_path); });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const carton::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
