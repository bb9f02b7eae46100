#pragma once

#include <vector>

namespace driftlab {

/// Orthonormal Daubechies low-pass filter with S vanishing moments
/// (length 2S, sum sqrt(2), minimum-phase root selection). S = 1 is Haar.
std::vector<double> daubechies_lowpass(int S);

/// Values of the scaling function of `lowpass` at t = i / 2^depth,
/// i = 0 .. (L-1) 2^depth, computed by the cascade algorithm.
std::vector<double> cascade_scaling_function(const std::vector<double>& lowpass, int depth);

} // namespace driftlab
