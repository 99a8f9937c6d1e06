#include "hsr/logit_io.hpp"

#include "hsr/io_util.hpp"

#include <cstring>

namespace hsr {

void save_logits(const LogitMap& zmap, const std::string& path) {
    zmap.validate();
    std::vector<uint8_t> out;
    out.reserve(16 + zmap.data.size() * 4);
    const char magic[4] = {'H', 'S', 'R', 'Z'};
    out.insert(out.end(), magic, magic + 4);
    put_u32(out, static_cast<uint32_t>(zmap.height));
    put_u32(out, static_cast<uint32_t>(zmap.width));
    put_u32(out, static_cast<uint32_t>(zmap.classes));
    for (float v : zmap.data) put_f32(out, v);
    atomic_write_file(path, out.data(), out.size());
}

LogitMap load_logits(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "HSRZ", 4) != 0)
        throw Error("not a logit map file: " + path);
    LogitMap zmap(static_cast<int>(get_u32(bytes.data() + 4)),
                  static_cast<int>(get_u32(bytes.data() + 8)),
                  static_cast<int>(get_u32(bytes.data() + 12)));
    if (zmap.height < 1 || zmap.width < 1 || zmap.classes < 1)
        throw Error("logit map header declares invalid dimensions in " + path);
    if (bytes.size() != 16 + zmap.data.size() * 4)
        throw Error("logit map payload size mismatch in " + path);
    for (size_t i = 0; i < zmap.data.size(); ++i)
        zmap.data[i] = get_f32(bytes.data() + 16 + i * 4);
    zmap.validate();
    return zmap;
}

} // namespace hsr
