#include "diffeo/svf.hpp"

#include <cmath>

namespace diffeo {

namespace {

void check_velocity(const VectorField& velocity, int steps) {
    if (velocity.kind() != FieldKind::velocity && velocity.kind() != FieldKind::displacement)
        throw InvalidArgument(std::string("exponentiate needs a velocity field, got ") +
                              to_string(velocity.kind()));
    if (steps < 1 || steps > 12)
        throw InvalidArgument("squaring steps must be in [1, 12], got " + std::to_string(steps));
    for (double v : velocity.data())
        if (!std::isfinite(v)) throw InvalidArgument("velocity field holds non-finite values");
}

VectorField scale_and_square(const VectorField& velocity, double sign, int steps) {
    const Grid3& g = velocity.grid();
    const double scale = sign / std::ldexp(1.0, steps);
    VectorField phi(g, FieldKind::transformation);
    for (std::size_t idx = 0; idx < g.size(); ++idx)
        phi.set(idx, voxel_position(g, idx) + scale * velocity.get(idx));
    for (int s = 0; s < steps; ++s) phi = compose(phi, phi);
    return phi;
}

}  // namespace

VectorField exponentiate(const VectorField& velocity, int steps) {
    check_velocity(velocity, steps);
    return scale_and_square(velocity, 1.0, steps);
}

VectorField exponentiate_inverse(const VectorField& velocity, int steps) {
    check_velocity(velocity, steps);
    return scale_and_square(velocity, -1.0, steps);
}

}  // namespace diffeo
