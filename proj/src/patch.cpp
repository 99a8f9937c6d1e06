#include "hsr/patch.hpp"

#include <algorithm>
#include <cstring>

namespace hsr {

int mirror_index(int t, int n) {
    if (t < 0) return -t - 1;
    if (t >= n) return 2 * n - 1 - t;
    return t;
}

Patch extract_patch(const HsiCube& cube, int x, int y, int S) {
    if (S < 1 || S % 2 == 0)
        throw Error("patch size must be odd and positive, got " + std::to_string(S));
    const int limit = 2 * std::min(cube.height, cube.width) - 1;
    if (S > limit)
        throw Error("patch size " + std::to_string(S) + " exceeds mirror limit " +
                    std::to_string(limit) + " for this cube");
    if (x < 0 || x >= cube.height || y < 0 || y >= cube.width)
        throw Error("patch center out of bounds");

    const int half = (S - 1) / 2;
    const int D = cube.bands;
    Patch p;
    p.size = S;
    p.bands = D;
    p.center_row = x;
    p.center_col = y;
    p.data.resize(static_cast<size_t>(S) * S * D);

    for (int pr = 0; pr < S; ++pr) {
        const int r = mirror_index(x - half + pr, cube.height);
        for (int pc = 0; pc < S; ++pc) {
            const int c = mirror_index(y - half + pc, cube.width);
            std::memcpy(p.data.data() + (static_cast<size_t>(pr) * S + pc) * D,
                        cube.spectrum(r, c), static_cast<size_t>(D) * sizeof(float));
        }
    }
    return p;
}

} // namespace hsr
