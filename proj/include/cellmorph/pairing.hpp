#pragma once

#include "cellmorph/mask_io.hpp"

#include <cstddef>
#include <vector>

namespace cellmorph {

struct CellNucleusPair {
    Label cell_label = 0;
    Label nucleus_label = 0;
    double cell_area_um2 = 0.0;     // C_i, the full cytoplasm area of the cell
    double nucleus_area_um2 = 0.0;  // N_i
    double ratio = 0.0;             // C_i / N_i
    std::size_t overlap_px = 0;
    bool multi_nucleate = false;
};

struct PairingResult {
    std::vector<CellNucleusPair> pairs;  // ascending by nucleus label
    std::vector<Label> unpaired_nuclei;
    std::vector<Label> unpaired_cells;
};

/// Assigns each nucleus to the cell with the largest pixel overlap (ties go
/// to the smaller cell label). Nuclei overlapping no cell and cells that
/// received no nucleus are reported as unpaired. A cell holding several
/// nuclei yields one pair per nucleus, all flagged multi-nucleate.
/// Throws DimensionMismatchError if the masks differ in size.
PairingResult pair_subjects(const LabelMask& cells, const LabelMask& nuclei);

}  // namespace cellmorph
