#include "diffeo/average.hpp"

#include <algorithm>

#include "diffeo/diffgeo.hpp"
#include "diffeo/parallel.hpp"

namespace diffeo {

MonitorPair average_monitor(const std::vector<VectorField>& phis) {
    if (phis.empty()) throw InvalidArgument("cannot average an empty list of transformations");
    const Grid3 grid = phis.front().grid();
    for (const auto& phi : phis) require_same_grid(grid, phi.grid(), "average");

    std::vector<ScalarVolume> jds;
    std::vector<VectorField> curls;
    for (const auto& phi : phis) {
        jds.push_back(jacobian_determinant(phi));
        curls.push_back(curl(phi));
    }

    const std::size_t count = phis.size();
    const double denom = static_cast<double>(count);
    MonitorPair out{ScalarVolume(grid, VolumeKind::jacobian), VectorField(grid, FieldKind::curl)};
    parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
        std::vector<double> values(count);
        auto sorted_mean = [&]() {
            std::sort(values.begin(), values.end());
            // The mean of equal values is that value, exactly.
            if (values.front() == values.back()) return values.front();
            double s = 0.0;
            for (double v : values) s += v;
            return s / denom;
        };
        for (std::size_t idx = b; idx < e; ++idx) {
            for (std::size_t i = 0; i < count; ++i) values[i] = jds[i][idx];
            out.f0[idx] = sorted_mean();
            for (int c = 0; c < 3; ++c) {
                for (std::size_t i = 0; i < count; ++i) values[i] = curls[i].comp(idx, c);
                out.g0.comp(idx, c) = sorted_mean();
            }
        }
    });
    return out;
}

ReconstructResult average_transformations(const std::vector<VectorField>& phis,
                                          const SolveOptions& opts) {
    return reconstruct(average_monitor(phis), opts);
}

}  // namespace diffeo
