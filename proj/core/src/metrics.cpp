#include "diffeo/metrics.hpp"

#include <cmath>

#include "diffeo/parallel.hpp"

namespace diffeo {

namespace {

long label_of(double v) { return static_cast<long>(std::llround(v)); }

}  // namespace

DiceResult dice(const ScalarVolume& seg_a, const ScalarVolume& seg_b, long label) {
    require_same_grid(seg_a.grid(), seg_b.grid(), "dice");
    DiceResult r;
    for (std::size_t idx = 0; idx < seg_a.size(); ++idx) {
        const bool in_a = label_of(seg_a[idx]) == label;
        const bool in_b = label_of(seg_b[idx]) == label;
        r.size_a += in_a;
        r.size_b += in_b;
        r.intersection += in_a && in_b;
    }
    if (r.size_a + r.size_b == 0) {
        r.both_empty = true;
        r.value = 1.0;
    } else {
        r.value = 2.0 * static_cast<double>(r.intersection) / static_cast<double>(r.size_a + r.size_b);
    }
    return r;
}

MultiLabelDice dice_multilabel(const ScalarVolume& seg_a, const ScalarVolume& seg_b) {
    require_same_grid(seg_a.grid(), seg_b.grid(), "dice_multilabel");
    struct Counts {
        std::size_t a = 0, b = 0, both = 0;
    };
    std::map<long, Counts> counts;
    for (std::size_t idx = 0; idx < seg_a.size(); ++idx) {
        const long la = label_of(seg_a[idx]);
        const long lb = label_of(seg_b[idx]);
        if (la != 0) ++counts[la].a;
        if (lb != 0) ++counts[lb].b;
        if (la != 0 && la == lb) ++counts[la].both;
    }
    MultiLabelDice out;
    if (counts.empty()) {
        out.mean = 1.0;
        return out;
    }
    double total = 0.0;
    for (const auto& [label, c] : counts) {
        const double d = 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
        out.per_label[label] = d;
        total += d;
    }
    out.mean = total / static_cast<double>(counts.size());
    return out;
}

double ssd_value(const ScalarVolume& a, const ScalarVolume& b) {
    require_same_grid(a.grid(), b.grid(), "ssd");
    const double total = parallel_sum(a.size(), [&](std::size_t i) {
        const double d = a[i] - b[i];
        return d * d;
    });
    return 0.5 * total / static_cast<double>(a.size());
}

}  // namespace diffeo
