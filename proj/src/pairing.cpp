#include "cellmorph/pairing.hpp"

#include "cellmorph/errors.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace cellmorph {

PairingResult pair_subjects(const LabelMask& cells, const LabelMask& nuclei) {
    if (cells.width() != nuclei.width() || cells.height() != nuclei.height()) {
        throw DimensionMismatchError("cytoplasm and nuclei masks differ in size");
    }

    std::unordered_map<Label, std::size_t> cell_px;
    std::unordered_map<Label, std::size_t> nucleus_px;
    // nucleus -> (cell -> overlapping pixels); std::map keeps cells ordered for
    // the smaller-label tie-break.
    std::unordered_map<Label, std::map<Label, std::size_t>> overlap;

    const auto c = cells.data();
    const auto n = nuclei.data();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] != 0) ++cell_px[c[i]];
        if (n[i] != 0) {
            ++nucleus_px[n[i]];
            if (c[i] != 0) ++overlap[n[i]][c[i]];
        }
    }

    std::vector<Label> nucleus_ids;
    nucleus_ids.reserve(nucleus_px.size());
    for (const auto& [id, _] : nucleus_px) nucleus_ids.push_back(id);
    std::sort(nucleus_ids.begin(), nucleus_ids.end());

    PairingResult result;
    std::map<Label, std::size_t> nuclei_per_cell;
    for (Label nid : nucleus_ids) {
        auto it = overlap.find(nid);
        if (it == overlap.end()) {
            result.unpaired_nuclei.push_back(nid);
            continue;
        }
        Label best = 0;
        std::size_t best_px = 0;
        for (const auto& [cid, px] : it->second) {
            if (px > best_px) {  // strict: earlier (smaller) label wins ties
                best = cid;
                best_px = px;
            }
        }
        CellNucleusPair pair;
        pair.cell_label = best;
        pair.nucleus_label = nid;
        pair.cell_area_um2 = static_cast<double>(cell_px.at(best)) * cells.scale().area_per_px;
        pair.nucleus_area_um2 = static_cast<double>(nucleus_px.at(nid)) * nuclei.scale().area_per_px;
        pair.ratio = pair.cell_area_um2 / pair.nucleus_area_um2;
        pair.overlap_px = best_px;
        result.pairs.push_back(pair);
        ++nuclei_per_cell[best];
    }
    for (auto& pair : result.pairs) pair.multi_nucleate = nuclei_per_cell[pair.cell_label] > 1;

    for (const auto& [cid, _] : cell_px) {
        if (!nuclei_per_cell.contains(cid)) result.unpaired_cells.push_back(cid);
    }
    std::sort(result.unpaired_cells.begin(), result.unpaired_cells.end());
    return result;
}

}  // namespace cellmorph
