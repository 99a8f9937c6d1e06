#include "hsr/label_io.hpp"

#include "hsr/io_util.hpp"
#include "hsr/png_io.hpp"

#include <json.hpp>

#include <filesystem>

namespace hsr {

using nlohmann::json;
namespace fs = std::filesystem;

std::string palette_sidecar_path(const std::string& label_path) {
    fs::path p(label_path);
    p.replace_extension(".palette.json");
    return p.string();
}

void save_palette(const Palette& palette, const std::string& path) {
    json j = json::array();
    for (const auto& e : palette.entries) {
        j.push_back({{"index", e.index},
                     {"name", e.name},
                     {"rgb", {e.color[0], e.color[1], e.color[2]}}});
    }
    atomic_write_file(path, j.dump(2) + "\n");
}

Palette load_palette(const std::string& path) {
    const json j = json::parse(read_text_file(path));
    if (!j.is_array()) throw Error("palette file is not a JSON array: " + path);
    Palette palette;
    for (const auto& e : j) {
        PaletteEntry entry;
        entry.index = e.at("index").get<int>();
        entry.name = e.at("name").get<std::string>();
        const auto& rgb = e.at("rgb");
        if (!rgb.is_array() || rgb.size() != 3)
            throw Error("palette rgb must be a 3-element array: " + path);
        for (int i = 0; i < 3; ++i) entry.color[i] = rgb[i].get<uint8_t>();
        palette.entries.push_back(entry);
    }
    palette.num_classes = static_cast<int>(palette.entries.size()) - 1;
    return palette;
}

void save_label(const LabelMap& label, const std::string& path, const Palette& palette) {
    label.validate();
    Gray8 img(label.height, label.width);
    img.data = label.data;
    write_gray8_png(img, path);
    save_palette(palette, palette_sidecar_path(path));
}

LabelMap load_label(const std::string& path, int num_classes) {
    const Gray8 img = read_gray8_png(path);
    LabelMap label(img.height, img.width, num_classes);
    label.data = img.data;
    for (size_t i = 0; i < label.data.size(); ++i)
        if (label.data[i] > num_classes)
            throw Error("label value " + std::to_string(label.data[i]) +
                        " exceeds declared class count " + std::to_string(num_classes) +
                        " in " + path);
    return label;
}

DatasetManifest load_manifest(const std::string& path) {
    const json j = json::parse(read_text_file(path));
    DatasetManifest m;
    m.num_classes = j.at("num_classes").get<int>();
    if (m.num_classes < 1 || m.num_classes > 255)
        throw Error("manifest num_classes out of range: " + std::to_string(m.num_classes));
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        return fs::path(p).is_absolute() ? p : (base / p).string();
    };
    for (const auto& f : j.at("frames")) {
        FrameEntry e;
        e.cube_path = resolve(f.at("cube").get<std::string>());
        e.coarse_path = resolve(f.at("coarse").get<std::string>());
        if (f.contains("fine")) e.fine_path = resolve(f.at("fine").get<std::string>());
        m.frames.push_back(std::move(e));
    }
    if (m.frames.empty()) throw Error("manifest lists no frames: " + path);
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    json frames = json::array();
    for (const auto& f : manifest.frames) {
        json e = {{"cube", f.cube_path}, {"coarse", f.coarse_path}};
        if (!f.fine_path.empty()) e["fine"] = f.fine_path;
        frames.push_back(std::move(e));
    }
    const json j = {{"num_classes", manifest.num_classes}, {"frames", std::move(frames)}};
    atomic_write_file(path, j.dump(2) + "\n");
}

} // namespace hsr
