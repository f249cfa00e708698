#include "diffeo/atlas.hpp"

#include <algorithm>
#include <numeric>

#include "diffeo/average.hpp"

namespace diffeo {

AtlasResult build_atlas(const std::vector<ScalarVolume>& subjects, const AtlasOptions& opts) {
    if (subjects.size() < 2) throw InvalidArgument("atlas construction needs at least 2 subjects");
    for (const auto& s : subjects) require_same_grid(subjects.front().grid(), s.grid(), "atlas subject");
    if (!(opts.epsilon > 0.0) || opts.max_outer_iters < 1)
        throw InvalidArgument("atlas needs epsilon > 0 and at least one outer iteration");
    if (opts.single_candidate && *opts.single_candidate >= subjects.size())
        throw InvalidArgument("single candidate index out of range");
    opts.registration.validate();

    // Visit subjects in content order so the result does not depend on the input order.
    std::vector<std::size_t> order(subjects.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(subjects[a].data().begin(), subjects[a].data().end(),
                                            subjects[b].data().begin(), subjects[b].data().end());
    });

    AtlasResult result;
    AtlasReport& report = result.report;
    report.candidates = opts.single_candidate ? std::vector<std::size_t>{*opts.single_candidate} : order;

    const Grid3& grid = subjects.front().grid();
    std::vector<ScalarVolume> templates;
    std::vector<VectorField> cumulative;
    for (std::size_t c : report.candidates) {
        templates.push_back(subjects[c]);
        cumulative.push_back(identity_field(grid));
    }

    for (int t = 0; t < opts.max_outer_iters; ++t) {
        std::vector<double> deviation(templates.size());
        std::vector<double> self(templates.size());
        std::vector<VectorField> averages;
        for (std::size_t c = 0; c < templates.size(); ++c) {
            std::vector<VectorField> phis;
            for (std::size_t j : order) {
                auto reg = register_images(templates[c], subjects[j], opts.registration);
                if (j == report.candidates[c]) self[c] = mean_displacement(reg.phi);
                phis.push_back(std::move(reg.phi));
            }
            auto avg = average_transformations(phis, opts.solve);
            deviation[c] = mean_displacement(avg.phi);
            templates[c] = warp(templates[c], avg.phi);
            cumulative[c] = compose(cumulative[c], avg.phi);
            averages.push_back(std::move(avg.phi));
        }
        report.deviations.push_back(deviation);
        report.self_displacement.push_back(self);
        report.max_deviation.push_back(*std::max_element(deviation.begin(), deviation.end()));
        report.iterations = t + 1;
        if (opts.keep_fields) result.fields.push_back(std::move(averages));
        if (report.max_deviation.back() < opts.epsilon) {
            report.converged = true;
            break;
        }
    }

    const auto& last = report.deviations.back();
    const std::size_t best =
        static_cast<std::size_t>(std::min_element(last.begin(), last.end()) - last.begin());
    report.chosen = report.candidates[best];
    result.atlas = std::move(templates[best]);
    result.cumulative = std::move(cumulative[best]);
    return result;
}

}  // namespace diffeo
