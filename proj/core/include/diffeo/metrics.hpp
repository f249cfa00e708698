#pragma once

#include <map>

#include "diffeo/fields.hpp"

namespace diffeo {

struct DiceResult {
    double value = 0.0;
    std::size_t intersection = 0;
    std::size_t size_a = 0;
    std::size_t size_b = 0;
    // Set when label k is absent from both volumes; value is then 1.
    bool both_empty = false;
};

// 2|A_k ∩ B_k| / (|A_k| + |B_k|) for label k.
DiceResult dice(const ScalarVolume& seg_a, const ScalarVolume& seg_b, long label);

struct MultiLabelDice {
    std::map<long, double> per_label;  // background 0 excluded
    double mean = 0.0;                 // unweighted; 1 when neither volume has a foreground label
};

MultiLabelDice dice_multilabel(const ScalarVolume& seg_a, const ScalarVolume& seg_b);

// ½ · mean over voxels of (a − b)².
double ssd_value(const ScalarVolume& a, const ScalarVolume& b);

}  // namespace diffeo
