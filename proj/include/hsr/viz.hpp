#pragma once

#include "hsr/png_io.hpp"
#include "hsr/types.hpp"

namespace hsr {

// Class-colored overlay: labeled pixels blend (1-alpha)*base + alpha*color,
// background passes the base through. Quantization is round-to-nearest, so
// bytes are a pure function of the inputs.
Rgb8 render_overlay(const LabelMap& label, const RgbImage& base,
                    const Palette& palette, double alpha);

} // namespace hsr
