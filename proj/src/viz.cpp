#include "hsr/viz.hpp"

#include <algorithm>
#include <cmath>

namespace hsr {

Rgb8 render_overlay(const LabelMap& label, const RgbImage& base,
                    const Palette& palette, double alpha) {
    label.validate();
    base.validate();
    if (label.height != base.height || label.width != base.width)
        throw Error("label and base image dimensions disagree");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("overlay alpha must lie in [0,1]");
    if (palette.num_classes < label.num_classes)
        throw Error("palette covers fewer classes than the label map");

    Rgb8 out(label.height, label.width);
    for (int r = 0; r < label.height; ++r)
        for (int c = 0; c < label.width; ++c) {
            const uint8_t cls = label.at(r, c);
            uint8_t* dst = out.pixel(r, c);
            for (int ch = 0; ch < 3; ++ch) {
                double v = base.at(r, c, ch);
                if (cls != 0) {
                    const double col = palette.color_of(cls)[ch] / 255.0;
                    v = (1.0 - alpha) * v + alpha * col;
                }
                dst[ch] = static_cast<uint8_t>(
                    std::clamp(std::lround(v * 255.0), 0l, 255l));
            }
        }
    return out;
}

} // namespace hsr
