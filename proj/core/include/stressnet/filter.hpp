#pragma once

#include <vector>

#include "stressnet/signal.hpp"

namespace stressnet {

/// Discrete Gaussian kernel truncated at +-ceil(3*sigma), renormalized to
/// sum exactly 1.
std::vector<double> gaussian_kernel(double sigma);

/// Convolution with gaussian_kernel(sigma), replicate padding, same length.
std::vector<double> gaussian_smooth_1d(const std::vector<double>& values, double sigma);

/// Windowed-sinc (Hamming) linear-phase FIR band-pass with
/// 4*ceil(sample_rate_hz)+1 taps. The tap mean is subtracted so the DC gain
/// is exactly zero (a plain truncated sinc of this length leaks most of DC
/// at sub-Hz cutoffs). Applied with replicate padding and delay
/// compensation: output is time-aligned with the input, equal length.
Signal fir_bandpass(const Signal& sig, double low_hz, double high_hz);

/// The taps fir_bandpass convolves with, for frequency-response inspection.
std::vector<double> fir_bandpass_taps(double sample_rate_hz, double low_hz, double high_hz);

}  // namespace stressnet
