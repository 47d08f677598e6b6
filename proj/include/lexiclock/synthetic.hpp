#pragma once

// Simulated Swadesh datasets: varieties evolved from one root list, split
// into equal-size clades, scattered uniformly over a lat/lon box.

#include <cstddef>
#include <cstdint>
#include <string>

#include "errors.hpp"
#include "estimation.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace lexiclock {

struct SyntheticLayout {
    std::size_t varieties = 40;
    std::size_t clades = 2;
    double lat_min = -25.0, lat_max = -12.0;
    double lon_min = 43.0, lon_max = 50.5;
};

// Symbol s of the simulator alphabet as a code point: a..z, then U+00C0 on.
inline char32_t symbol_glyph(std::uint8_t s) {
    return s < 26 ? static_cast<char32_t>(U'a' + s) : static_cast<char32_t>(0x00C0 + (s - 26));
}

inline std::u32string word_text(const SimWord& w) {
    std::u32string out;
    out.reserve(w.symbols.size());
    for (auto s : w.symbols) out.push_back(symbol_glyph(s));
    return out;
}

inline SwadeshDataset synthetic_dataset(const SimParams& p, const SyntheticLayout& layout = {}) {
    if (layout.varieties < 2) throw invalid_argument("need at least 2 varieties");
    if (layout.clades < 1 || layout.clades > layout.varieties)
        throw invalid_argument("clade count must lie in [1, varieties]");
    const auto lists = evolve_star(p, layout.varieties);

    SwadeshDataset ds;
    for (int c = 0; c < p.m; ++c) ds.concepts.push_back("c" + std::to_string(c + 1));

    Rng geo(derive_seed(p.seed, 0xC0FFEEULL << 32));
    for (std::size_t v = 0; v < layout.varieties; ++v) {
        VarietyMeta meta;
        meta.id = "v" + std::to_string(v + 1);
        meta.name = "variety " + std::to_string(v + 1);
        meta.latitude = layout.lat_min + (layout.lat_max - layout.lat_min) * geo.uniform();
        meta.longitude = layout.lon_min + (layout.lon_max - layout.lon_min) * geo.uniform();
        // contiguous blocks: first varieties/clades in clade A, ...
        meta.clade = std::string(1, static_cast<char>('A' + (v * layout.clades / layout.varieties) % 26));
        if (layout.clades > 26) meta.clade += std::to_string(v * layout.clades / layout.varieties);
        ds.varieties.push_back(std::move(meta));

        std::vector<std::u32string> row;
        row.reserve(lists[v].size());
        for (const auto& w : lists[v]) row.push_back(word_text(w));
        ds.words.push_back(std::move(row));
    }
    ds.validate();
    return ds;
}

}  // namespace lexiclock
