#pragma once

#include "hsr/types.hpp"

namespace hsr {

// Reflects an out-of-range index back into [0, n): -1 -> 0, n -> n-1.
// Single reflection only, hence the S <= 2*min(H,W)-1 bound on patch size.
int mirror_index(int t, int n);

// Window of S x S spectra centered at (x, y), all bands, mirror-padded at
// the image border so every pixel has a patch.
Patch extract_patch(const HsiCube& cube, int x, int y, int S);

} // namespace hsr
