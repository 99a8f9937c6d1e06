#include "hsr/classifier.hpp"
#include "hsr/cube_io.hpp"
#include "hsr/fusion.hpp"
#include "hsr/io_util.hpp"
#include "hsr/label_io.hpp"
#include "hsr/logit_io.hpp"
#include "hsr/metrics.hpp"
#include "hsr/patch.hpp"
#include "hsr/png_io.hpp"
#include "hsr/rng.hpp"
#include "hsr/spectral.hpp"
#include "hsr/synth.hpp"
#include "hsr/viz.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace hsr;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kToolVersion = "0.1.0";

void log_line(const json& j) { std::cerr << j.dump() << "\n"; }

std::string hash_hex(uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

// One metadata file per run, beside the primary output.
void write_metadata(const std::string& path, const std::string& command,
                    const json& config, uint64_t seed) {
    const json meta = {{"command", command},
                       {"config", config},
                       {"config_hash", hash_hex(fnv1a64(config.dump()))},
                       {"seed", seed},
                       {"versions",
                        {{"hsrefine", kToolVersion},
                         {"cube_format", kCubeVersion},
                         {"logit_format", 1},
                         {"model_format", 1}}}};
    atomic_write_file(path, meta.dump(2) + "\n");
    log_line({{"event", "wrote"}, {"path", path}});
}

json load_config_json(const std::string& path) {
    if (path.empty()) return json::object();
    const json j = json::parse(read_text_file(path));
    if (!j.is_object()) throw Error("config file must hold a JSON object: " + path);
    return j;
}

// Config file seeds the bound variables; explicit flags then override them.
template <typename T>
void cfg(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

LabelMap load_label_auto(const std::string& path, int classes_flag) {
    if (classes_flag > 0) return load_label(path, classes_flag);
    const std::string side = palette_sidecar_path(path);
    if (fs::exists(side)) return load_label(path, load_palette(side).num_classes);
    throw Error("class count unknown for " + path +
                "; pass --classes or keep the palette sidecar next to it");
}

Palette palette_for(const LabelMap& label, const std::string& label_path) {
    const std::string side = palette_sidecar_path(label_path);
    if (fs::exists(side)) {
        Palette p = load_palette(side);
        if (p.num_classes >= label.num_classes) return p;
    }
    return make_default_palette(label.num_classes);
}

std::vector<std::pair<int, int>> parse_metamer_pairs(const std::string& text) {
    std::vector<std::pair<int, int>> pairs;
    if (text.empty()) return pairs;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        const size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw Error("metamer pair must look like A:B, got '" + item + "'");
        pairs.emplace_back(std::stoi(item.substr(0, colon)),
                           std::stoi(item.substr(colon + 1)));
        pos = comma + 1;
    }
    return pairs;
}

std::vector<int> parse_kernel_sizes(const std::string& text, int num_classes) {
    std::vector<int> sizes;
    if (text.empty()) {
        sizes.assign(static_cast<size_t>(num_classes), 1);
        return sizes;
    }
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        sizes.push_back(std::stoi(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (sizes.size() == 1) sizes.assign(static_cast<size_t>(num_classes), sizes[0]);
    if (static_cast<int>(sizes.size()) != num_classes)
        throw Error("kernel size list must have one entry per class");
    return sizes;
}

HsiCube project_cube_to_rgb_cube(const HsiCube& cube) {
    const SpectralResponse resp = default_rgb_response(
        cube.bands, cube.wavelength_start_nm, cube.wavelength_step_nm);
    return rgb_to_cube(project_to_rgb(cube, resp));
}

// Shared by refine and search-kernels: prior from a hard label file or from a
// logit map plus noise control.
LabelMap load_prior(const std::string& prior_path, const std::string& logits_path,
                    double alpha, int num_classes) {
    if (prior_path.empty() == logits_path.empty())
        throw Error("pass exactly one of --prior and --logits");
    if (!prior_path.empty()) return load_label(prior_path, num_classes);
    const LogitMap zmap = load_logits(logits_path);
    if (zmap.classes != num_classes)
        throw Error("logit map classes disagree with the coarse label");
    return apply_noise_control(zmap, alpha);
}

struct SynthArgs {
    std::string out;
    int scenes = 1;
    int height = 128, width = 128;
    int classes = 6;
    int spectra_per_class = 1;
    double noise_sigma = 0.02;
    int region_scale = 32;
    std::string metamer_pairs;
    double metamer_magnitude = 0.5;
    int bands = 129;
    int shrink_radius = 3;
    int boundary_jitter = 1;
    double drop_fraction = 0.1;
    int small_region_area = 64;
    uint64_t seed = 0;
};

void run_synth(const SynthArgs& a) {
    const auto pairs = parse_metamer_pairs(a.metamer_pairs);
    fs::create_directories(a.out);
    const Palette palette = make_default_palette(a.classes);

    DatasetManifest manifest;
    manifest.num_classes = a.classes;
    for (int i = 0; i < a.scenes; ++i) {
        SceneConfig sc;
        sc.height = a.height;
        sc.width = a.width;
        sc.num_classes = a.classes;
        sc.spectra_per_class = a.spectra_per_class;
        sc.noise_sigma = a.noise_sigma;
        sc.region_scale = a.region_scale;
        sc.metamer_pairs = pairs;
        sc.metamer_magnitude = a.metamer_magnitude;
        sc.bands = a.bands;
        sc.seed = derive_seed(a.seed, "synth/" + std::to_string(i));

        DegradeConfig dc;
        dc.shrink_radius = a.shrink_radius;
        dc.boundary_jitter = a.boundary_jitter;
        dc.drop_fraction = a.drop_fraction;
        dc.small_region_area = a.small_region_area;
        dc.seed = derive_seed(a.seed, "degrade/" + std::to_string(i));

        const auto [cube, fine] = generate_scene(sc);
        const LabelMap coarse = degrade_labels(fine, dc);

        char name[32];
        std::snprintf(name, sizeof(name), "scene_%03d", i);
        const fs::path dir = fs::path(a.out) / name;
        fs::create_directories(dir);
        save_cube(cube, (dir / "cube.hsc").string());
        save_label(fine, (dir / "fine.png").string(), palette);
        save_label(coarse, (dir / "coarse.png").string(), palette);

        FrameEntry entry;
        entry.cube_path = std::string(name) + "/cube.hsc";
        entry.coarse_path = std::string(name) + "/coarse.png";
        entry.fine_path = std::string(name) + "/fine.png";
        manifest.frames.push_back(entry);
        log_line({{"event", "scene"},
                  {"index", i},
                  {"labeled_fraction",
                   static_cast<double>(coarse.count_nonbackground()) /
                       static_cast<double>(coarse.data.size())}});
    }
    save_manifest(manifest, (fs::path(a.out) / "manifest.json").string());

    const json config = {{"out", a.out},
                         {"scenes", a.scenes},
                         {"height", a.height},
                         {"width", a.width},
                         {"classes", a.classes},
                         {"spectra_per_class", a.spectra_per_class},
                         {"noise_sigma", a.noise_sigma},
                         {"region_scale", a.region_scale},
                         {"metamer_pairs", a.metamer_pairs},
                         {"metamer_magnitude", a.metamer_magnitude},
                         {"bands", a.bands},
                         {"shrink_radius", a.shrink_radius},
                         {"boundary_jitter", a.boundary_jitter},
                         {"drop_fraction", a.drop_fraction},
                         {"small_region_area", a.small_region_area}};
    write_metadata((fs::path(a.out) / "run.meta.json").string(), "synth", config, a.seed);
}

struct TrainArgs {
    std::string manifest;
    std::string out;
    double learning_rate = 0.01;
    double weight_decay = 0.0005;
    int epochs = 30;
    int pixels_per_image = 10000;
    int cube_batch = 256;
    int image_batch = 6;
    int patch_size = 11;
    bool project_rgb = false;
    int threads = 1;
    uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    std::vector<HsiCube> cubes;
    std::vector<LabelMap> labels;
    for (const auto& f : manifest.frames) {
        HsiCube cube = load_cube(f.cube_path);
        if (a.project_rgb) cube = project_cube_to_rgb_cube(cube);
        cubes.push_back(std::move(cube));
        labels.push_back(load_label(f.coarse_path, manifest.num_classes));
    }
    std::vector<std::pair<const HsiCube*, const LabelMap*>> frames;
    for (size_t i = 0; i < cubes.size(); ++i)
        frames.emplace_back(&cubes[i], &labels[i]);

    TrainConfig tc;
    tc.learning_rate = a.learning_rate;
    tc.weight_decay = a.weight_decay;
    tc.epochs = a.epochs;
    tc.pixels_per_image = a.pixels_per_image;
    tc.cube_batch = a.cube_batch;
    tc.image_batch = a.image_batch;
    tc.patch_size = a.patch_size;
    tc.seed = derive_seed(a.seed, "train");

    const TrainResult result = train_frames(frames, manifest.num_classes, tc, a.threads);
    for (size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
        log_line({{"event", "epoch"},
                  {"epoch", e + 1},
                  {"mean_loss", result.epoch_mean_loss[e]}});
    save_model(result.model, a.out);
    log_line({{"event", "wrote"}, {"path", a.out}});

    const json config = {{"manifest", a.manifest},
                         {"out", a.out},
                         {"learning_rate", a.learning_rate},
                         {"weight_decay", a.weight_decay},
                         {"epochs", a.epochs},
                         {"pixels_per_image", a.pixels_per_image},
                         {"cube_batch", a.cube_batch},
                         {"image_batch", a.image_batch},
                         {"patch_size", a.patch_size},
                         {"project_rgb", a.project_rgb},
                         {"threads", a.threads}};
    write_metadata(a.out + ".meta.json", "train", config, a.seed);
}

struct PriorArgs {
    std::string model;
    std::string cube;
    std::string out;
    std::string label_out;
    double alpha = 0.7;
    bool project_rgb = false;
    int threads = 1;
    uint64_t seed = 0;
};

void run_prior(const PriorArgs& a) {
    const ClassifierModel model = load_model(a.model);
    HsiCube cube = load_cube(a.cube);
    if (a.project_rgb) cube = project_cube_to_rgb_cube(cube);
    const LogitMap zmap = predict_map(model, cube, a.threads);
    save_logits(zmap, a.out);
    log_line({{"event", "wrote"}, {"path", a.out}});
    if (!a.label_out.empty()) {
        const LabelMap prior = apply_noise_control(zmap, a.alpha);
        save_label(prior, a.label_out, make_default_palette(prior.num_classes));
        log_line({{"event", "wrote"}, {"path", a.label_out}});
    }
    const json config = {{"model", a.model},     {"cube", a.cube},
                         {"out", a.out},         {"label_out", a.label_out},
                         {"alpha", a.alpha},     {"project_rgb", a.project_rgb},
                         {"threads", a.threads}};
    write_metadata(a.out + ".meta.json", "prior", config, a.seed);
}

struct RefineArgs {
    std::string coarse;
    std::string logits;
    std::string prior;
    std::string out;
    double alpha = 0.7;
    std::string kernel_sizes;
    int max_kernel = 11;
    int classes = 0;
    uint64_t seed = 0;
};

void run_refine(const RefineArgs& a) {
    const LabelMap coarse = load_label_auto(a.coarse, a.classes);
    const LabelMap prior = load_prior(a.prior, a.logits, a.alpha, coarse.num_classes);
    if (prior.height != coarse.height || prior.width != coarse.width)
        throw Error("prior and coarse label dimensions disagree");

    FusionConfig fc;
    fc.alpha = a.alpha;
    fc.max_kernel = a.max_kernel;
    fc.kernel_sizes = parse_kernel_sizes(a.kernel_sizes, coarse.num_classes);
    fc.validate(coarse.num_classes);

    const Mask mask = build_mask(coarse, fc.kernel_sizes);
    const LabelMap refined = fuse(coarse, prior, mask);
    save_label(refined, a.out, palette_for(coarse, a.coarse));
    log_line({{"event", "wrote"}, {"path", a.out}});

    const json config = {{"coarse", a.coarse},   {"logits", a.logits},
                         {"prior", a.prior},     {"out", a.out},
                         {"alpha", a.alpha},     {"kernel_sizes", a.kernel_sizes},
                         {"max_kernel", a.max_kernel}};
    write_metadata(a.out + ".meta.json", "refine", config, a.seed);
}

struct SearchArgs {
    std::string coarse;
    std::string logits;
    std::string prior;
    std::string ref;
    std::string out;
    double alpha = 0.7;
    int max_kernel = 11;
    int classes = 0;
    uint64_t seed = 0;
};

void run_search(const SearchArgs& a) {
    const LabelMap coarse = load_label_auto(a.coarse, a.classes);
    const LabelMap prior = load_prior(a.prior, a.logits, a.alpha, coarse.num_classes);
    const LabelMap ref = load_label(a.ref, coarse.num_classes);

    const KernelSearchResult res =
        search_kernel_sizes(coarse, prior, ref, a.max_kernel);
    for (const auto& w : res.warnings)
        log_line({{"event", "warning"}, {"message", w}});

    json table = json::array();
    for (const auto& row : res.iou_table) {
        json r = json::array();
        for (double v : row) {
            if (std::isnan(v)) r.push_back(nullptr);
            else r.push_back(v);
        }
        table.push_back(std::move(r));
    }
    const json result = {{"selected_sizes", res.sizes},
                         {"tested_sizes", res.tested_sizes},
                         {"iou_table", std::move(table)},
                         {"warnings", res.warnings}};
    const std::string text = result.dump(2) + "\n";
    std::cout << text;
    if (!a.out.empty()) {
        atomic_write_file(a.out, text);
        log_line({{"event", "wrote"}, {"path", a.out}});
        const json config = {{"coarse", a.coarse}, {"logits", a.logits},
                             {"prior", a.prior},   {"ref", a.ref},
                             {"out", a.out},       {"alpha", a.alpha},
                             {"max_kernel", a.max_kernel}};
        write_metadata(a.out + ".meta.json", "search-kernels", config, a.seed);
    }
}

struct EvalArgs {
    std::string pred;
    std::string ref;
    std::string out;
    int classes = 0;
    uint64_t seed = 0;
};

void run_eval(const EvalArgs& a) {
    const LabelMap ref = load_label_auto(a.ref, a.classes);
    const LabelMap pred = load_label(a.pred, ref.num_classes);
    const EvalReport rep = evaluate(pred, ref);
    const Palette palette = palette_for(ref, a.ref);
    const std::string jtext = report_json(rep);
    std::cout << jtext;
    std::cout << report_text(rep, &palette);
    if (!a.out.empty()) {
        atomic_write_file(a.out, jtext);
        log_line({{"event", "wrote"}, {"path", a.out}});
        const json config = {{"pred", a.pred}, {"ref", a.ref}, {"out", a.out}};
        write_metadata(a.out + ".meta.json", "eval", config, a.seed);
    }
}

struct VizArgs {
    std::string label;
    std::string cube;
    std::string out;
    double alpha = 0.5;
    int classes = 0;
    uint64_t seed = 0;
};

void run_viz(const VizArgs& a) {
    const LabelMap label = load_label_auto(a.label, a.classes);
    const HsiCube cube = load_cube(a.cube);
    const SpectralResponse resp = default_rgb_response(
        cube.bands, cube.wavelength_start_nm, cube.wavelength_step_nm);
    const RgbImage base = project_to_rgb(cube, resp);
    const Palette palette = palette_for(label, a.label);
    const Rgb8 overlay = render_overlay(label, base, palette, a.alpha);
    write_rgb8_png(overlay, a.out);
    log_line({{"event", "wrote"}, {"path", a.out}});
    const json config = {
        {"label", a.label}, {"cube", a.cube}, {"out", a.out}, {"alpha", a.alpha}};
    write_metadata(a.out + ".meta.json", "viz", config, a.seed);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hsrefine: refine coarse segmentation labels with a hyperspectral prior"};
    app.require_subcommand(1);

    json c;
    try {
        c = load_config_json(find_config_arg(argc, argv));
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override it");

    SynthArgs sy;
    cfg(c, "out", sy.out); cfg(c, "scenes", sy.scenes);
    cfg(c, "height", sy.height); cfg(c, "width", sy.width);
    cfg(c, "classes", sy.classes); cfg(c, "spectra_per_class", sy.spectra_per_class);
    cfg(c, "noise_sigma", sy.noise_sigma); cfg(c, "region_scale", sy.region_scale);
    cfg(c, "metamer_pairs", sy.metamer_pairs);
    cfg(c, "metamer_magnitude", sy.metamer_magnitude);
    cfg(c, "bands", sy.bands); cfg(c, "shrink_radius", sy.shrink_radius);
    cfg(c, "boundary_jitter", sy.boundary_jitter);
    cfg(c, "drop_fraction", sy.drop_fraction);
    cfg(c, "small_region_area", sy.small_region_area); cfg(c, "seed", sy.seed);
    auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
    synth->add_option("--out", sy.out, "output directory")->required(!c.contains("out"));
    synth->add_option("--scenes", sy.scenes, "scene count");
    synth->add_option("--height", sy.height, "scene height");
    synth->add_option("--width", sy.width, "scene width");
    synth->add_option("--classes", sy.classes, "class count");
    synth->add_option("--spectra-per-class", sy.spectra_per_class, "archetype variants");
    synth->add_option("--noise-sigma", sy.noise_sigma, "additive Gaussian sigma");
    synth->add_option("--region-scale", sy.region_scale, "mean region diameter");
    synth->add_option("--metamer-pairs", sy.metamer_pairs, "pairs like 1:2,3:4");
    synth->add_option("--metamer-magnitude", sy.metamer_magnitude, "pair separation");
    synth->add_option("--bands", sy.bands, "spectral band count");
    synth->add_option("--shrink-radius", sy.shrink_radius, "coarse interior shrink");
    synth->add_option("--boundary-jitter", sy.boundary_jitter, "coarse boundary jitter");
    synth->add_option("--drop-fraction", sy.drop_fraction, "small regions dropped");
    synth->add_option("--small-region-area", sy.small_region_area,
                      "area threshold for drop candidates");
    synth->add_option("--seed", sy.seed, "global seed");
    synth->callback([&] { run_synth(sy); });

    TrainArgs tr;
    cfg(c, "manifest", tr.manifest); cfg(c, "model_out", tr.out);
    cfg(c, "learning_rate", tr.learning_rate);
    cfg(c, "weight_decay", tr.weight_decay); cfg(c, "epochs", tr.epochs);
    cfg(c, "pixels_per_image", tr.pixels_per_image);
    cfg(c, "cube_batch", tr.cube_batch); cfg(c, "image_batch", tr.image_batch);
    cfg(c, "patch_size", tr.patch_size); cfg(c, "project_rgb", tr.project_rgb);
    cfg(c, "threads", tr.threads); cfg(c, "seed", tr.seed);
    auto* train_cmd = app.add_subcommand("train", "train the spectral prior classifier");
    train_cmd->add_option("--manifest", tr.manifest, "dataset manifest")
        ->required(!c.contains("manifest"));
    train_cmd->add_option("--out", tr.out, "model output path")
        ->required(!c.contains("model_out"));
    train_cmd->add_option("--learning-rate", tr.learning_rate, "SGD step size");
    train_cmd->add_option("--weight-decay", tr.weight_decay, "decoupled weight decay");
    train_cmd->add_option("--epochs", tr.epochs, "training epochs");
    train_cmd->add_option("--pixels-per-image", tr.pixels_per_image,
                          "pixels sampled per frame");
    train_cmd->add_option("--cube-batch", tr.cube_batch, "SGD minibatch size");
    train_cmd->add_option("--image-batch", tr.image_batch, "frames per group");
    train_cmd->add_option("--patch-size", tr.patch_size, "odd patch side length");
    train_cmd->add_flag("--project-rgb", tr.project_rgb,
                        "train on RGB-projected 3-band cubes");
    train_cmd->add_option("--threads", tr.threads, "worker threads");
    train_cmd->add_option("--seed", tr.seed, "global seed");
    train_cmd->callback([&] { run_train(tr); });

    PriorArgs pr;
    cfg(c, "model", pr.model); cfg(c, "cube", pr.cube); cfg(c, "logits_out", pr.out);
    cfg(c, "label_out", pr.label_out); cfg(c, "alpha", pr.alpha);
    cfg(c, "project_rgb", pr.project_rgb); cfg(c, "threads", pr.threads);
    cfg(c, "seed", pr.seed);
    auto* prior_cmd = app.add_subcommand("prior", "emit the dense logit map");
    prior_cmd->add_option("--model", pr.model, "trained model")
        ->required(!c.contains("model"));
    prior_cmd->add_option("--cube", pr.cube, "input cube")
        ->required(!c.contains("cube"));
    prior_cmd->add_option("--out", pr.out, "logit map output")
        ->required(!c.contains("logits_out"));
    prior_cmd->add_option("--label-out", pr.label_out,
                          "also write the noise-controlled prior label");
    prior_cmd->add_option("--alpha", pr.alpha, "confidence threshold");
    prior_cmd->add_flag("--project-rgb", pr.project_rgb,
                        "predict on RGB-projected 3-band cube");
    prior_cmd->add_option("--threads", pr.threads, "worker threads");
    prior_cmd->add_option("--seed", pr.seed, "global seed");
    prior_cmd->callback([&] { run_prior(pr); });

    RefineArgs rf;
    cfg(c, "coarse", rf.coarse); cfg(c, "logits", rf.logits); cfg(c, "prior", rf.prior);
    cfg(c, "refined_out", rf.out); cfg(c, "alpha", rf.alpha);
    cfg(c, "kernel_sizes", rf.kernel_sizes); cfg(c, "max_kernel", rf.max_kernel);
    cfg(c, "classes", rf.classes); cfg(c, "seed", rf.seed);
    auto* refine_cmd = app.add_subcommand("refine", "fuse coarse labels with the prior");
    refine_cmd->add_option("--coarse", rf.coarse, "coarse label PNG")
        ->required(!c.contains("coarse"));
    refine_cmd->add_option("--logits", rf.logits, "logit map input");
    refine_cmd->add_option("--prior", rf.prior, "hard prior label input");
    refine_cmd->add_option("--out", rf.out, "refined label output")
        ->required(!c.contains("refined_out"));
    refine_cmd->add_option("--alpha", rf.alpha, "confidence threshold");
    refine_cmd->add_option("--kernel-sizes", rf.kernel_sizes,
                           "per-class odd sizes, comma separated; one value = uniform");
    refine_cmd->add_option("--max-kernel", rf.max_kernel, "kernel size cap");
    refine_cmd->add_option("--classes", rf.classes, "class count override");
    refine_cmd->add_option("--seed", rf.seed, "global seed");
    refine_cmd->callback([&] { run_refine(rf); });

    SearchArgs se;
    cfg(c, "coarse", se.coarse); cfg(c, "logits", se.logits); cfg(c, "prior", se.prior);
    cfg(c, "ref", se.ref); cfg(c, "search_out", se.out); cfg(c, "alpha", se.alpha);
    cfg(c, "max_kernel", se.max_kernel); cfg(c, "classes", se.classes);
    cfg(c, "seed", se.seed);
    auto* search_cmd =
        app.add_subcommand("search-kernels", "select per-class erosion kernel sizes");
    search_cmd->add_option("--coarse", se.coarse, "coarse label PNG")
        ->required(!c.contains("coarse"));
    search_cmd->add_option("--logits", se.logits, "logit map input");
    search_cmd->add_option("--prior", se.prior, "hard prior label input");
    search_cmd->add_option("--ref", se.ref, "reference fine label")
        ->required(!c.contains("ref"));
    search_cmd->add_option("--out", se.out, "result JSON output");
    search_cmd->add_option("--alpha", se.alpha, "confidence threshold");
    search_cmd->add_option("--max-kernel", se.max_kernel, "largest size tested");
    search_cmd->add_option("--classes", se.classes, "class count override");
    search_cmd->add_option("--seed", se.seed, "global seed");
    search_cmd->callback([&] { run_search(se); });

    EvalArgs ev;
    cfg(c, "pred", ev.pred); cfg(c, "ref", ev.ref); cfg(c, "report_out", ev.out);
    cfg(c, "classes", ev.classes); cfg(c, "seed", ev.seed);
    auto* eval_cmd = app.add_subcommand("eval", "score a prediction against a reference");
    eval_cmd->add_option("--pred", ev.pred, "predicted label PNG")
        ->required(!c.contains("pred"));
    eval_cmd->add_option("--ref", ev.ref, "reference label PNG")
        ->required(!c.contains("ref"));
    eval_cmd->add_option("--out", ev.out, "report JSON output");
    eval_cmd->add_option("--classes", ev.classes, "class count override");
    eval_cmd->add_option("--seed", ev.seed, "global seed");
    eval_cmd->callback([&] { run_eval(ev); });

    VizArgs vz;
    cfg(c, "label", vz.label); cfg(c, "cube", vz.cube); cfg(c, "overlay_out", vz.out);
    cfg(c, "overlay_alpha", vz.alpha); cfg(c, "classes", vz.classes);
    cfg(c, "seed", vz.seed);
    auto* viz_cmd = app.add_subcommand("viz", "render a class overlay image");
    viz_cmd->add_option("--label", vz.label, "label PNG")
        ->required(!c.contains("label"));
    viz_cmd->add_option("--cube", vz.cube, "cube for the base image")
        ->required(!c.contains("cube"));
    viz_cmd->add_option("--out", vz.out, "overlay PNG output")
        ->required(!c.contains("overlay_out"));
    viz_cmd->add_option("--alpha", vz.alpha, "overlay blend strength");
    viz_cmd->add_option("--classes", vz.classes, "class count override");
    viz_cmd->add_option("--seed", vz.seed, "global seed");
    viz_cmd->callback([&] { run_viz(vz); });

    // --config lives on the parent; let it appear after the subcommand name too.
    for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
