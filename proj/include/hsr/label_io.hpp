#pragma once

#include "hsr/types.hpp"

#include <string>
#include <vector>

namespace hsr {

// Label maps are 8-bit single-channel PNGs with a JSON palette sidecar
// (<stem>.palette.json) mapping index -> {name, rgb}. load_label enforces the
// declared class count so a stray index fails at the boundary, not deep in
// the pipeline.
std::string palette_sidecar_path(const std::string& label_path);

void save_label(const LabelMap& label, const std::string& path, const Palette& palette);
LabelMap load_label(const std::string& path, int num_classes);

void save_palette(const Palette& palette, const std::string& path);
Palette load_palette(const std::string& path);

// Dataset manifest: one frame per entry, paths relative to the manifest file.
struct FrameEntry {
    std::string cube_path;
    std::string coarse_path;
    std::string fine_path; // empty when the frame has no reference label
};

struct DatasetManifest {
    int num_classes = 0;
    std::vector<FrameEntry> frames;

    size_t size() const { return frames.size(); }
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

} // namespace hsr
