#pragma once

#include <vector>

#include "fmtk/types.hpp"

namespace fmtk {

// Centered multidimensional DFT over a row-major array (last axis fastest).
// Index i on an axis of length n stands for the offset i − n/2, on both the
// input and the output side:
//   X[k] = Σ_m x[m] exp(sign · 2πi · (k − n/2)(m − n/2) / n)   per axis.
// Unnormalized; sign is −1 (forward) or +1.
void centered_dft(CVec& data, const std::vector<int>& dims, int sign);

// Band-limited interpolation onto a grid `factor` times finer on every axis
// (zero padding of the centered spectrum). Axis lengths must be even; input
// sample i then coincides with output sample factor·i.
CVec upsample(const CVec& data, const std::vector<int>& dims, int factor);

// ∂f/∂x_axis by spectral differentiation for samples with the given step.
// The Nyquist bin is dropped.
CVec spectral_derivative(const CVec& data, const std::vector<int>& dims, int axis, double step);

}  // namespace fmtk
