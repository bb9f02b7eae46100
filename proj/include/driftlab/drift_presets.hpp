#pragma once

// Named drift fields used as ground truth in simulations and studies.

#include "driftlab/basis.hpp"
#include "driftlab/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace driftlab {

struct DriftModel {
    /// Canonical text such as "gradient_cos(amplitude=0.5)"; also the hash input.
    std::string description;
    int dim = 1;
    VectorField field;
    /// B with b = grad B, when the drift is known to be a gradient.
    std::optional<ScalarField> potential;
    std::uint64_t hash() const;

    Point operator()(const Point& x) const { return field(x); }
};

/// zero, constant, gradient_cos, gradient_sum, divfree_perturbed (d >= 2), trig.
///   constant          b_j = amplitude
///   gradient_cos      B = amplitude cos(2 pi x_1)
///   gradient_sum      B = amplitude sum_j cos(2 pi x_j)
///   divfree_perturbed gradient_cos plus e^{-2B} (d2 psi, -d1 psi, 0), psi = amplitude sin(2 pi (x_1 + 2 x_2)) / 4;
///                     same invariant measure as gradient_cos
///   trig              a fixed non-gradient trigonometric field scaled by amplitude / 0.5
const std::vector<std::string>& drift_preset_names();

DriftModel drift_preset(const std::string& name, int d, double amplitude = 0.5);

/// Drift given by wavelet coefficients (d components).
DriftModel drift_from_coefficients(const CoefficientField& c);

} // namespace driftlab
