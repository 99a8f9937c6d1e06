#pragma once

#include "hsr/types.hpp"

#include <string>

namespace hsr {

// Logit map container ("HSRZ"): magic, u32 height, u32 width, u32 classes,
// then height*width*classes little-endian f32 in pixel-major order.
void save_logits(const LogitMap& zmap, const std::string& path);
LogitMap load_logits(const std::string& path);

} // namespace hsr
